"""
Configuration for flavokg
"""

import os

from .env import CONFIG_ENV, HOME_ENV, LOG_LEVEL_ENV

FLAVOKG_HOME = os.path.expanduser(os.environ.get(HOME_ENV, "~/.flavokg"))
DEFAULT_CONFIG_PATH = os.environ.get(
    CONFIG_ENV, os.path.join(FLAVOKG_HOME, "config.json")
)
LOG_LEVEL = os.environ.get(LOG_LEVEL_ENV, "INFO").upper()
LOGGING_CONF = os.path.join(os.path.dirname(__file__), "logging.conf")

VERSION = "0.1.0"

DEFAULT_NAMESPACE = "http://example.org/ff/"
DEFAULT_NAMESPACE_PREFIX = "ff"
OBO_PURL_BASE = "http://purl.obolibrary.org/obo/"
