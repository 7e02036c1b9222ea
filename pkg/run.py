#!/usr/bin/env python
"""
RingSplit - Main Entry Point

    python run.py solve --builtin quadratic_consensus --seed 7
    python run.py validate --n 3 --algo frb --L 2 --lambda 0.3
    python run.py serve
"""
from app.cli import cli


def main():
    """Main entry point."""
    cli()


if __name__ == "__main__":
    main()
