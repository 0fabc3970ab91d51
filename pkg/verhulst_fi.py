"""Launcher for running the CLI from a source checkout."""

import sys

from verhulst.cli import main

if __name__ == "__main__":
    sys.exit(main())
