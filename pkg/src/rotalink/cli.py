"""Command-line frontend: experiment runners, codec tools, and the polar
radar map renderer.

Subcommands: sweep, constellation, radar-map, lidar decode, loop-trace.
Angles on the command line are degrees; everything internal is radians.
CSV outputs use ',' separators, '.' decimals, a header row, and '#'
comment lines carrying the seed and a hash of the effective configuration,
so identical (config, seed) reruns are byte-identical. The radar map is a
binary portable graymap (P5) so no graphics stack is needed. Exit status:
0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .lidar import (DetectionCluster, FrameError, decode_cluster)
from .scenario import (ConfigParseError, ConfigValidationError, Scenario,
                       load_scenario, scenario_to_text)
from .sim import (SweepResult, constellation_experiment, run_closed_loop,
                  static_pose, sweep_azimuth)
from .control import PidGains, ServoModel
from .lidar import RadarModel

__all__ = [
    "RadarMap",
    "build_radar_map",
    "write_pgm",
    "read_sweep_csv",
    "cmd_sweep",
    "cmd_constellation",
    "cmd_radar_map",
    "cmd_lidar_decode",
    "cmd_loop_trace",
    "main",
    "entry",
]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


@dataclass(frozen=True)
class RadarMap:
    """Polar occupancy histogram over azimuth x range bins.

    Bin (i, j) is centered at azimuth j*(360/azimuth_bins) degrees and
    range i*(max_range_m/range_bins) meters; grid rows are range bins.
    """

    grid: np.ndarray
    azimuth_bins: int
    range_bins: int
    max_range_m: float

    def __post_init__(self) -> None:
        if self.grid.shape != (self.range_bins, self.azimuth_bins):
            raise ValueError("grid dimensions do not match the bin counts")
        if (self.grid < 0).any():
            raise ValueError("cell counts must be >= 0")


def build_radar_map(clusters: Sequence[DetectionCluster], azimuth_bins: int,
                    range_bins: int, max_range_m: float) -> RadarMap:
    if azimuth_bins < 1 or range_bins < 1:
        raise ValueError("bin counts must be >= 1")
    if not max_range_m > 0:
        raise ValueError("max_range_m must be > 0")
    grid = np.zeros((range_bins, azimuth_bins), dtype=np.int64)
    az_width = 360.0 / azimuth_bins
    r_width = max_range_m / range_bins
    for c in clusters:
        if c.range_m > max_range_m:
            continue
        az_bin = int(round((c.azimuth_cdeg / 100.0) / az_width)) % azimuth_bins
        r_bin = min(range_bins - 1, int(round(c.range_m / r_width)))
        grid[r_bin, az_bin] += 1
    return RadarMap(grid=grid, azimuth_bins=azimuth_bins,
                    range_bins=range_bins, max_range_m=max_range_m)


def write_pgm(grid: np.ndarray, path: Path) -> None:
    """Binary portable graymap, brightness linearly scaled to the peak count."""
    peak = int(grid.max())
    if peak > 0:
        pixels = np.round(grid * (255.0 / peak)).astype(np.uint8)
    else:
        pixels = np.zeros_like(grid, dtype=np.uint8)
    rows, cols = grid.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def _load_config(path: str | None) -> Scenario:
    if path is None:
        return Scenario()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise _IoFailure(f"cannot read config {p}: {exc}") from exc
    return load_scenario(text)


class _IoFailure(Exception):
    pass


def _metadata_lines(scn: Scenario, seed: int, calibration_exponent: float | None) -> list[str]:
    digest = hashlib.sha256(scenario_to_text(scn).encode("utf-8")).hexdigest()
    lines = [f"# rotalink {__version__}",
             f"# seed = {seed}",
             f"# config_sha256 = {digest}"]
    if calibration_exponent is not None:
        lines.append(f"# calibration_exponent = {calibration_exponent!r}")
    return lines


def _parse_angles_spec(spec: str) -> list[float]:
    """start:stop:step in degrees, inclusive of stop."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"angles spec must be start:stop:step, got {spec!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"non-numeric angles spec: {spec!r}") from None
    if start == stop:
        return [start]
    if step <= 0:
        raise ValueError(f"angles step must be > 0, got {step}")
    if stop < start:
        raise ValueError(f"angles stop ({stop}) below start ({start})")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def cmd_sweep(config_path: str | None, angles_spec: str, output_path: str,
              seed: int | None = None,
              calibration_exponent: float | None = None) -> int:
    """SNR-versus-azimuth sweep for both modes, written as CSV."""
    try:
        scn = _load_config(config_path)
        angles_deg = _parse_angles_spec(angles_spec)
        use_seed = scn.seed if seed is None else seed
        result = sweep_azimuth(
            scn, [math.radians(a) for a in angles_deg],
            seed=use_seed, calibration_exponent=calibration_exponent)
    except _IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ConfigParseError, ConfigValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    lines = _metadata_lines(scn, use_seed, calibration_exponent)
    lines.append("azimuth_deg,snr_ra_db,snr_fixed_db")
    for deg, ra, fixed in zip(angles_deg, result.snr_ra_db, result.snr_fixed_db):
        lines.append(f"{deg:.6f},{ra:.6f},{fixed:.6f}")
    try:
        Path(output_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write {output_path}: {exc}", file=sys.stderr)
        return EXIT_IO

    ra = result.snr_ra_db
    gap_lo = ra[0] - result.snr_fixed_db[0]
    gap_hi = ra[-1] - result.snr_fixed_db[-1]
    print(f"rotatable snr: min {ra.min():.2f} dB, max {ra.max():.2f} dB")
    print(f"fixed-antenna gap at {angles_deg[0]:g} deg: {gap_lo:.2f} dB, "
          f"at {angles_deg[-1]:g} deg: {gap_hi:.2f} dB")
    print(f"wrote {output_path} ({len(angles_deg)} rows)")
    return EXIT_OK


def read_sweep_csv(path: str | Path) -> SweepResult:
    """Re-parse a sweep CSV back into a SweepResult."""
    azimuth, ra, fixed = [], [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("azimuth_deg"):
                continue
            a, r, f = line.split(",")
            azimuth.append(math.radians(float(a)))
            ra.append(float(r))
            fixed.append(float(f))
    return SweepResult(
        azimuth_rad=np.asarray(azimuth),
        snr_ra_db=np.asarray(ra),
        snr_fixed_db=np.asarray(fixed),
    )


def _write_constellation_csv(path: Path, frame, meta: list[str]) -> None:
    lines = list(meta)
    lines.append("index,tx_i,tx_q,rx_i,rx_q")
    for i, (tx, rx) in enumerate(zip(frame.tx_symbols, frame.rx_symbols)):
        lines.append(f"{i},{tx.real:.6f},{tx.imag:.6f},{rx.real:.6f},{rx.imag:.6f}")
    lines.append(f"# snr_db,evm_rms,ber = {frame.snr_db_applied:.6f},"
                 f"{frame.evm_rms:.6f},{frame.ber:.6g}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def cmd_constellation(config_path: str | None, azimuth_deg: float, n_symbols: int,
                      output_dir: str, seed: int | None = None,
                      calibration_exponent: float | None = None) -> int:
    """Rotatable-vs-fixed constellation comparison at one RX azimuth."""
    try:
        scn = _load_config(config_path)
        use_seed = scn.seed if seed is None else seed
        frame_ra, frame_fixed = constellation_experiment(
            scn, math.radians(azimuth_deg), n_symbols, use_seed,
            calibration_exponent=calibration_exponent)
    except _IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ConfigParseError, ConfigValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        meta = _metadata_lines(scn, use_seed, calibration_exponent)
        _write_constellation_csv(out / "constellation_ra.csv", frame_ra, meta)
        _write_constellation_csv(out / "constellation_fixed.csv", frame_fixed, meta)
        delta = frame_ra.snr_db_applied - frame_fixed.snr_db_applied
        summary = "\n".join(meta + [
            f"azimuth_deg = {azimuth_deg:.6f}",
            f"n_symbols = {n_symbols}",
            f"snr_ra_db = {frame_ra.snr_db_applied:.6f}",
            f"snr_fixed_db = {frame_fixed.snr_db_applied:.6f}",
            f"rx_power_delta_db = {delta:.6f}",
            f"evm_ra = {frame_ra.evm_rms:.6f}",
            f"evm_fixed = {frame_fixed.evm_rms:.6f}",
            f"ber_ra = {frame_ra.ber:.6g}",
            f"ber_fixed = {frame_fixed.ber:.6g}",
        ]) + "\n"
        (out / "summary.txt").write_text(summary, encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write to {output_dir}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary, end="")
    return EXIT_OK


def cmd_radar_map(cluster_file: str, bins_spec: str, output_path: str,
                  max_range_m: float = 12.0) -> int:
    """Decode a frame file and render the polar detection histogram as PGM."""
    try:
        parts = bins_spec.lower().split("x")
        if len(parts) != 2:
            raise ValueError(f"bins spec must be AZIMUTHxRANGE, got {bins_spec!r}")
        azimuth_bins, range_bins = int(parts[0]), int(parts[1])
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        text = Path(cluster_file).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {cluster_file}: {exc}", file=sys.stderr)
        return EXIT_IO

    clusters: list[DetectionCluster] = []
    rejects: dict[str, int] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            clusters.append(decode_cluster(line))
        except FrameError as exc:
            rejects[exc.kind] = rejects.get(exc.kind, 0) + 1

    total_bad = sum(rejects.values())
    for kind in sorted(rejects):
        print(f"rejected {rejects[kind]} frame(s): {kind}")
    if not clusters:
        print(f"error: no valid frames in {cluster_file} "
              f"({total_bad} rejected)", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        radar_map = build_radar_map(clusters, azimuth_bins, range_bins, max_range_m)
        write_pgm(radar_map.grid, Path(output_path))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: cannot write {output_path}: {exc}", file=sys.stderr)
        return EXIT_IO

    r_bin, az_bin = np.unravel_index(int(np.argmax(radar_map.grid)), radar_map.grid.shape)
    print(f"decoded {len(clusters)} frame(s), rejected {total_bad}")
    print(f"modal bin: azimuth {az_bin * 360.0 / azimuth_bins:.2f} deg, "
          f"range {r_bin * max_range_m / range_bins:.3f} m, "
          f"count {int(radar_map.grid[r_bin, az_bin])}")
    print(f"wrote {output_path} ({azimuth_bins}x{range_bins} bins)")
    return EXIT_OK


def cmd_lidar_decode(cluster_file: str, output_path: str | None = None) -> int:
    """Decode a frame file to CSV: cycle,azimuth_deg,range_m,intensity."""
    try:
        text = Path(cluster_file).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {cluster_file}: {exc}", file=sys.stderr)
        return EXIT_IO
    rows = ["cycle,azimuth_deg,range_m,intensity"]
    rejects: dict[str, int] = {}
    decoded = 0
    for line in text.splitlines():
        if not line.strip():
            continue
        try:
            c = decode_cluster(line)
        except FrameError as exc:
            rejects[exc.kind] = rejects.get(exc.kind, 0) + 1
            continue
        decoded += 1
        rows.append(f"{c.cycle_index},{c.azimuth_cdeg / 100.0:.2f},"
                    f"{c.range_mm / 1000.0:.3f},{c.intensity}")
    for kind in sorted(rejects):
        print(f"rejected {rejects[kind]} frame(s): {kind}", file=sys.stderr)
    if decoded == 0:
        print(f"error: no valid frames in {cluster_file}", file=sys.stderr)
        return EXIT_VALIDATION
    csv_text = "\n".join(rows) + "\n"
    if output_path is None:
        print(csv_text, end="")
    else:
        try:
            Path(output_path).write_text(csv_text, encoding="utf-8")
        except OSError as exc:
            print(f"error: cannot write {output_path}: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK


def cmd_loop_trace(config_path: str | None, azimuth_deg: float, duration_s: float,
                   output_path: str, seed: int | None = None,
                   calibration_exponent: float | None = None) -> int:
    """Run one closed loop and write the control trace CSV."""
    try:
        scn = _load_config(config_path)
        use_seed = scn.seed if seed is None else seed
        result = run_closed_loop(
            scn, RadarModel(), PidGains(), ServoModel(),
            static_pose(math.radians(azimuth_deg), scn.link_distance_m),
            duration_s=duration_s, seed=use_seed,
            calibration_exponent=calibration_exponent)
    except _IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ConfigParseError, ConfigValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    lines = _metadata_lines(scn, use_seed, calibration_exponent)
    lines.append("t_s,setpoint_rad,commanded_rad,actual_rad,pulse_us,error_rad")
    for r in result.records:
        lines.append(f"{r.t_s:.6f},{r.setpoint_rad:.6f},{r.servo.commanded_rad:.6f},"
                     f"{r.servo.actual_rad:.6f},{r.servo.pulse_width_us},"
                     f"{r.error_rad:.6f}")
    try:
        Path(output_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write {output_path}: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {output_path} ({len(result.records)} ticks, "
          f"{len(result.estimates)} AoA estimates)")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rotalink",
        description="Radar-sensing-aided rotatable-antenna link simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="key=value scenario file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--calibration-exponent", type=float, default=None,
                       help="replace the beamwidth-derived pattern exponent")

    p = sub.add_parser("sweep", help="SNR versus RX azimuth for both modes")
    common(p)
    p.add_argument("--angles", default="-60:60:10",
                   help="start:stop:step in degrees (default -60:60:10)")
    p.add_argument("--out", default="sweep.csv")

    p = sub.add_parser("constellation", help="modem comparison at one azimuth")
    common(p)
    p.add_argument("--azimuth", type=float, default=60.0, help="RX azimuth, degrees")
    p.add_argument("--symbols", type=int, default=10000)
    p.add_argument("--out", default="constellation")

    p = sub.add_parser("radar-map", help="polar detection histogram as PGM")
    p.add_argument("cluster_file", help="newline-delimited hex frames")
    p.add_argument("--bins", default="72x24", help="AZIMUTHxRANGE bin counts")
    p.add_argument("--max-range", type=float, default=12.0, help="meters")
    p.add_argument("--out", default="radar_map.pgm")

    p = sub.add_parser("lidar", help="wire-frame codec tools")
    lidar_sub = p.add_subparsers(dest="lidar_command", required=True)
    p = lidar_sub.add_parser("decode", help="decode hex frames to CSV")
    p.add_argument("cluster_file")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")

    p = sub.add_parser("loop-trace", help="closed-loop servo trace CSV")
    common(p)
    p.add_argument("--azimuth", type=float, default=60.0, help="RX azimuth, degrees")
    p.add_argument("--duration", type=float, default=5.0, help="seconds")
    p.add_argument("--out", default="loop_trace.csv")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "sweep":
        return cmd_sweep(args.config, args.angles, args.out, seed=args.seed,
                         calibration_exponent=args.calibration_exponent)
    if args.command == "constellation":
        return cmd_constellation(args.config, args.azimuth, args.symbols, args.out,
                                 seed=args.seed,
                                 calibration_exponent=args.calibration_exponent)
    if args.command == "radar-map":
        return cmd_radar_map(args.cluster_file, args.bins, args.out,
                             max_range_m=args.max_range)
    if args.command == "lidar":
        return cmd_lidar_decode(args.cluster_file, args.out)
    if args.command == "loop-trace":
        return cmd_loop_trace(args.config, args.azimuth, args.duration, args.out,
                              seed=args.seed,
                              calibration_exponent=args.calibration_exponent)
    raise AssertionError(f"unhandled command {args.command!r}")


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
