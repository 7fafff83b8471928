#!/usr/bin/env python3
"""
Long-memory quadratic forms - simulation, covariances, condition (H) and limit laws

Usage:
    python quadforms.py simulate --model '{"kind": "isotropic", "dimension": 1, "alpha": -0.3}' --n 1024
    python quadforms.py experiment --config experiment.json --threads 4
"""

import sys

from lrd_quadforms.cli import main

if __name__ == "__main__":
    sys.exit(main())
