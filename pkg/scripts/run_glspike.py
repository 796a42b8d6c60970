#!/usr/bin/env python3
"""
Run simulations, experiments and verification suites.

Usage:
    python scripts/run_glspike.py simulate --gamma 0.1 --n 20
    python scripts/run_glspike.py dual --gamma 0.2 --horizon 50
    python scripts/run_glspike.py oracle --n 2 --gamma 0.5
    python scripts/run_glspike.py experiment rho --replicas 500 --threads 4
    python scripts/run_glspike.py sweep --out results/sweep.json --raw
    python scripts/run_glspike.py verify --dump-dir failures/
    python scripts/run_glspike.py replay results/sweep.json
"""
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.harness.cli import main


if __name__ == "__main__":
    sys.exit(main())
