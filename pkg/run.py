#!/usr/bin/env python3
"""
Command-line entry point for the maIoU toolkit.
Usage:
    python run.py [command] [options]

Commands:
    assign          Label anchors with every configured assigner
    stats           MOB histogram and IoU vs maIoU joint histogram
    bench           Time brute-force against integral-image maIoU
    compare         Label transitions between two or more assigners
    validate-config Validate a run configuration file

Run `python run.py <command> --help` for the options of each command.
"""

import sys

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
