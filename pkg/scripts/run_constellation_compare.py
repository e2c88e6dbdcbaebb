#!/usr/bin/env python3
"""Regenerate the rotatable-vs-fixed constellation comparison.

Places the receiver at +60 degrees and runs the 16-QAM modem at the
steady-state SNR of each mode, once with the calibrated pattern (the
configuration that reproduces the ~7 dB received-power gap) and once with
the idealized pattern. Each run writes two constellation CSVs plus a
summary with the power delta, EVM, and BER.

Usage: python scripts/run_constellation_compare.py [seed]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rotalink.cli import cmd_constellation

RESULTS = Path(__file__).resolve().parent.parent / "results"


def main() -> int:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    RESULTS.mkdir(exist_ok=True)
    rc = cmd_constellation(None, 60.0, 10000,
                           str(RESULTS / "constellation_calibrated"),
                           seed=seed, calibration_exponent=2.33)
    if rc != 0:
        return rc
    return cmd_constellation(None, 60.0, 10000,
                             str(RESULTS / "constellation_idealized"),
                             seed=seed)


if __name__ == "__main__":
    sys.exit(main())
