import subprocess
import sys

PATHS = ["flavokg", "tests", "scripts"]


def main():
    check = ["--check"] if "--check" in sys.argv[1:] else []
    formatted = subprocess.run(["black", *check, *PATHS])
    linted = subprocess.run(["flake8", "--max-line-length", "100", *PATHS])
    sys.exit(formatted.returncode or linted.returncode)
