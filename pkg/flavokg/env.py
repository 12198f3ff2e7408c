HOME_ENV = "FLAVOKG_HOME"
CONFIG_ENV = "FLAVOKG_CONFIG"
LOG_LEVEL_ENV = "FLAVOKG_LOG_LEVEL"
