"""
ctlab entry point

Usage:
    python ctlab.py <gen|analyze|classify|catalog> --config <path> [--out <dir>] [--threads <n>]
"""

from src.cli import main

if __name__ == '__main__':
    main()
