"""
cantor-index launcher.

Usage:
    python cantor_index.py pair-odd --config jobs/pair_odd.json --out reports/pair_odd.dsv
"""

import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
