import os
import shutil
import subprocess
import sys

BUILD_DIR = "docs/_build/html"


def main():
    # Start from a clean build directory
    if os.path.exists(BUILD_DIR):
        shutil.rmtree(BUILD_DIR)

    result = subprocess.run(["sphinx-build", "-W", "-b", "html", "docs/", BUILD_DIR])
    sys.exit(result.returncode)


if __name__ == "__main__":
    main()
