"""
Thin wrapper to run the CLI from scripts/run.py, so `python run.py <command>`
works from the project root.
"""

import sys

from scripts.run import main

if __name__ == "__main__":
    sys.exit(main())
