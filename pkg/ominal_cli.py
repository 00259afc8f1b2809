# ominal_cli.py - Ominal command-line entry point
"""
Exact o-minimal constructions over the rationals, from the command line.

Run: python ominal_cli.py fixture:crosses check dd crosses
"""

from ominal.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
