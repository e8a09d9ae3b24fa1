#!/usr/bin/env python3
"""Thin wrapper so experiments can be launched without installing the package.

Examples:
    python3 scripts/run_experiment.py --experiment mw-check
    python3 scripts/run_experiment.py --config scripts/configs/decay2d.cfg \
        --out results/
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from arbogas.cli import main

if __name__ == "__main__":
    sys.exit(main())
