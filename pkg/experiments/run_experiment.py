#!/usr/bin/env python3
"""
Blossom Experiment Runner

Runs one enumeration, verification suite or series computation and prints
its report. Exit code 0 when every check passes, 1 on a failed check or
domain error, 2 on bad usage.

Usage:
    python experiments/run_experiment.py verify bijection --edges 4
    python experiments/run_experiment.py series quartic-ising --t-order 12
    python experiments/run_experiment.py verify mobiles --preset acceptance-pointed
    BLOSSOM_THREADS=4 python experiments/run_experiment.py verify roundtrip --tree-edges 6
"""

import sys
import os
import logging

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.blossom.cli import main

logging.basicConfig(level=logging.INFO, format='%(asctime)s %(name)s %(levelname)s %(message)s')
logger = logging.getLogger('experiment')


def run():
    code = main(sys.argv[1:])
    logger.info(f"Exit code {code}")
    return code


if __name__ == '__main__':
    sys.exit(run())
