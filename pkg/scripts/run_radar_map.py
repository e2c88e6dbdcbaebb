#!/usr/bin/env python3
"""Regenerate the radar imaging map for the bench target.

Simulates 30 s of scans over a static receiver at +60 degrees / 4 m,
writes the raw hex frame log, decodes it to CSV, and renders the polar
occupancy map as a PGM image whose bright cell marks the receiver.

Usage: python scripts/run_radar_map.py [seed]
"""

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from rotalink.cli import cmd_lidar_decode, cmd_radar_map
from rotalink.lidar import RadarModel, encode_cluster, simulate_scan
from rotalink.scenario import Pose

RESULTS = Path(__file__).resolve().parent.parent / "results"


def main() -> int:
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    RESULTS.mkdir(exist_ok=True)
    model = RadarModel()
    rng = np.random.default_rng(seed)
    truth = Pose(math.radians(60.0), 4.0)
    lines = []
    for cycle in range(300):  # 30 s at 10 Hz
        for cluster in simulate_scan(model, truth, cycle, rng):
            lines.append(encode_cluster(cluster))
    frames = RESULTS / "radar_frames.hex"
    frames.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {frames} ({len(lines)} frames)")

    rc = cmd_lidar_decode(str(frames), str(RESULTS / "radar_frames.csv"))
    if rc != 0:
        return rc
    return cmd_radar_map(str(frames), "144x48", str(RESULTS / "radar_map.pgm"))


if __name__ == "__main__":
    sys.exit(main())
