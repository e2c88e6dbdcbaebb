#!/usr/bin/env python3
"""Regenerate the SNR-versus-azimuth experiment.

Sweeps the receiver from -60 to +60 degrees in 10 degree steps and writes
one CSV per pattern model: the idealized 60-degree-beamwidth roll-off and
the measurement-calibrated roll-off (exponent 2.33, ~7 dB gap at 60
degrees). The rotatable-antenna column stays flat while the fixed-antenna
column rolls off with the pattern.

Usage: python scripts/run_azimuth_sweep.py [seed]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rotalink.cli import cmd_sweep

RESULTS = Path(__file__).resolve().parent.parent / "results"


def main() -> int:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    RESULTS.mkdir(exist_ok=True)
    rc = cmd_sweep(None, "-60:60:10", str(RESULTS / "sweep_idealized.csv"), seed=seed)
    if rc != 0:
        return rc
    return cmd_sweep(None, "-60:60:10", str(RESULTS / "sweep_calibrated.csv"),
                     seed=seed, calibration_exponent=2.33)


if __name__ == "__main__":
    sys.exit(main())
