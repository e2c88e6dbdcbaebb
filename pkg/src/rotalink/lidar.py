"""Scanning TOF radar simulation, detection-cluster wire codec, and windowed
circular-mean AoA aggregation.

Wire frame (10 bytes, multi-byte fields little-endian)::

    byte 0-1   sync 0xAA 0x55
    byte 2-3   cycle_index   u16
    byte 4-5   azimuth_cdeg  u16, centidegrees in [0, 35999]
    byte 6-7   range_mm      u16
    byte 8     intensity     u8
    byte 9     checksum, XOR of bytes 2..8

Text form is 20 uppercase hex characters per frame, one frame per line.
The layout is a stand-in for the (unpublished) vendor format; the XOR
checksum detects every single-byte corruption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .scenario import Pose, wrap_angle

__all__ = [
    "FrameError",
    "FrameLengthError",
    "FrameSyncError",
    "FrameChecksumError",
    "FrameFieldError",
    "DetectionCluster",
    "AoaEstimate",
    "RadarModel",
    "AZIMUTH_CDEG_MAX",
    "FRAME_HEX_CHARS",
    "cdeg_from_rad",
    "rad_from_cdeg",
    "encode_cluster",
    "decode_cluster",
    "simulate_scan",
    "circular_mean",
    "aggregate_aoa",
]

SYNC = b"\xaa\x55"
FRAME_BYTES = 10
FRAME_HEX_CHARS = 2 * FRAME_BYTES
AZIMUTH_CDEG_MAX = 35999


class FrameError(ValueError):
    """Base class for wire-frame codec rejections."""

    kind = "frame"


class FrameLengthError(FrameError):
    """Line is not a 20-character hex string."""

    kind = "length"


class FrameSyncError(FrameError):
    """Frame does not start with the 0xAA 0x55 sync bytes."""

    kind = "sync"


class FrameChecksumError(FrameError):
    """XOR checksum over bytes 2..8 does not match byte 9."""

    kind = "checksum"


class FrameFieldError(FrameError):
    """A decoded field is outside its documented range."""

    kind = "field"


@dataclass(frozen=True)
class DetectionCluster:
    """One radar detection: scan counter, azimuth, range, return strength."""

    cycle_index: int
    azimuth_cdeg: int
    range_mm: int
    intensity: int

    def __post_init__(self) -> None:
        if not 0 <= self.cycle_index <= 0xFFFF:
            raise FrameFieldError(f"cycle_index out of u16 range: {self.cycle_index}")
        if not 0 <= self.azimuth_cdeg <= AZIMUTH_CDEG_MAX:
            raise FrameFieldError(
                f"azimuth_cdeg must be in [0, {AZIMUTH_CDEG_MAX}], got {self.azimuth_cdeg}")
        if not 0 <= self.range_mm <= 0xFFFF:
            raise FrameFieldError(f"range_mm out of u16 range: {self.range_mm}")
        if not 0 <= self.intensity <= 0xFF:
            raise FrameFieldError(f"intensity out of u8 range: {self.intensity}")

    @property
    def azimuth_rad(self) -> float:
        return rad_from_cdeg(self.azimuth_cdeg)

    @property
    def range_m(self) -> float:
        return self.range_mm / 1000.0


@dataclass(frozen=True)
class AoaEstimate:
    """Windowed circular-mean azimuth estimate."""

    azimuth_rad: float
    sample_count: int
    circular_dispersion: float
    window_end_s: float

    def __post_init__(self) -> None:
        if not -math.pi < self.azimuth_rad <= math.pi:
            raise ValueError(f"azimuth_rad must be in (-pi, pi], got {self.azimuth_rad}")
        if self.sample_count < 1:
            raise ValueError(f"sample_count must be >= 1, got {self.sample_count}")
        if not 0.0 <= self.circular_dispersion <= 1.0:
            raise ValueError(
                f"circular_dispersion must be in [0, 1], got {self.circular_dispersion}")


@dataclass(frozen=True)
class RadarModel:
    """Scanning radar parameters: typical hobby-lidar figures, all adjustable."""

    angular_resolution_rad: float = 2.0 * math.pi / 360.0
    aoa_noise_std_rad: float = math.radians(0.5)
    range_noise_std_m: float = 0.01
    range_gate_m: float = 12.0
    intensity_threshold: int = 16

    def __post_init__(self) -> None:
        if not self.angular_resolution_rad > 0:
            raise ValueError("angular_resolution_rad must be > 0")
        if self.aoa_noise_std_rad < 0 or self.range_noise_std_m < 0:
            raise ValueError("noise standard deviations must be >= 0")
        if not self.range_gate_m > 0:
            raise ValueError("range_gate_m must be > 0")
        if not 0 <= self.intensity_threshold <= 255:
            raise ValueError("intensity_threshold must be in [0, 255]")


def cdeg_from_rad(theta: float) -> int:
    """Angle in radians -> unsigned centidegrees in [0, 35999]."""
    deg = math.degrees(wrap_angle(theta)) % 360.0
    return int(round(deg * 100.0)) % 36000


def rad_from_cdeg(cdeg: int) -> float:
    """Unsigned centidegrees -> angle in (-pi, pi]."""
    return wrap_angle(math.radians(cdeg / 100.0))


def _xor(data: bytes | bytearray) -> int:
    out = 0
    for b in data:
        out ^= b
    return out


def encode_cluster(cluster: DetectionCluster) -> str:
    """Encode a cluster into its 20-character uppercase hex frame."""
    frame = bytearray(SYNC)
    frame += cluster.cycle_index.to_bytes(2, "little")
    frame += cluster.azimuth_cdeg.to_bytes(2, "little")
    frame += cluster.range_mm.to_bytes(2, "little")
    frame.append(cluster.intensity)
    frame.append(_xor(frame[2:9]))
    return frame.hex().upper()


def decode_cluster(line: str) -> DetectionCluster:
    """Decode one hex frame, validating sync, checksum, and field ranges."""
    text = line.strip()
    if len(text) != FRAME_HEX_CHARS:
        raise FrameLengthError(
            f"expected {FRAME_HEX_CHARS} hex characters, got {len(text)}")
    try:
        frame = bytes.fromhex(text)
    except ValueError:
        raise FrameLengthError(f"not a hex string: {text!r}") from None
    if frame[:2] != SYNC:
        raise FrameSyncError(f"bad sync bytes {frame[0]:02X} {frame[1]:02X}")
    if _xor(frame[2:9]) != frame[9]:
        raise FrameChecksumError(
            f"checksum mismatch: computed {_xor(frame[2:9]):02X}, frame has {frame[9]:02X}")
    azimuth_cdeg = int.from_bytes(frame[4:6], "little")
    if azimuth_cdeg > AZIMUTH_CDEG_MAX:
        raise FrameFieldError(f"azimuth_cdeg out of range: {azimuth_cdeg}")
    return DetectionCluster(
        cycle_index=int.from_bytes(frame[2:4], "little"),
        azimuth_cdeg=azimuth_cdeg,
        range_mm=int.from_bytes(frame[6:8], "little"),
        intensity=frame[8],
    )


def simulate_scan(
    model: RadarModel,
    truth: Pose,
    cycle_index: int,
    rng: np.random.Generator,
) -> list[DetectionCluster]:
    """One scan revolution over the single target in the scene.

    The beam nearest the true azimuth always returns an in-gate target;
    each adjacent beam fires only when a noisy ray lands inside it, giving
    1-3 clusters per scan (exactly one with zero noise). Every cluster
    reports the quantized beam azimuth plus fresh Gaussian AoA noise and a
    range perturbed by Gaussian range noise; intensity decays as the
    inverse square of measured range. Out-of-gate targets return nothing.
    """
    if truth.range_m > model.range_gate_m:
        return []
    res = model.angular_resolution_rad
    beam = round(truth.azimuth_rad / res) * res
    hits = 1
    for k in (-1, 1):
        ray = truth.azimuth_rad + rng.normal(0.0, model.aoa_noise_std_rad)
        if abs(wrap_angle(ray - (beam + k * res))) < res / 2.0:
            hits += 1
    clusters = []
    for _ in range(hits):
        azimuth = wrap_angle(beam + rng.normal(0.0, model.aoa_noise_std_rad))
        measured_range = truth.range_m + rng.normal(0.0, model.range_noise_std_m)
        measured_range = max(measured_range, 0.0)
        if measured_range < 1.0:
            intensity = 255
        else:
            intensity = min(255, int(round(255.0 / (measured_range * measured_range))))
        clusters.append(DetectionCluster(
            cycle_index=cycle_index % 0x10000,
            azimuth_cdeg=cdeg_from_rad(azimuth),
            range_mm=min(0xFFFF, max(0, int(round(measured_range * 1000.0)))),
            intensity=intensity,
        ))
    return clusters


def circular_mean(angles: Sequence[float]) -> tuple[float, float]:
    """Vector-sum mean of angles and its dispersion.

    Returns ``(mean, 1 - R/n)`` where R is the resultant length of the unit
    vectors; the mean is immune to the +-pi seam where an arithmetic mean
    would be wrong. Dispersion is 0 for identical angles, approaching 1 for
    angles spread uniformly around the circle.
    """
    arr = np.asarray(angles, dtype=float)
    if arr.size == 0:
        raise ValueError("circular_mean of an empty sequence")
    s = float(np.sum(np.sin(arr)))
    c = float(np.sum(np.cos(arr)))
    mean = wrap_angle(math.atan2(s, c))
    dispersion = 1.0 - math.hypot(s, c) / arr.size
    return mean, min(max(dispersion, 0.0), 1.0)


def aggregate_aoa(
    clusters: Iterable[tuple[float, DetectionCluster]],
    window_s: float,
    scan_hz: float,
    model: RadarModel | None = None,
) -> list[AoaEstimate]:
    """Collapse a time-stamped cluster stream into per-window AoA estimates.

    Windows tumble (non-overlapping, aligned to t = 0); a window covering
    [k*window_s, (k+1)*window_s) emits one estimate from the circular mean
    of its accepted clusters (intensity >= threshold, range <= gate) and
    nothing when empty. The stream must be time-ordered.
    """
    if model is None:
        model = RadarModel()
    if window_s <= 0:
        raise ValueError(f"window_s must be > 0, got {window_s}")
    if window_s * scan_hz < 1.0:
        raise ValueError(
            f"window_s * scan_hz must be >= 1, got {window_s * scan_hz}")
    gate_mm = model.range_gate_m * 1000.0
    estimates: list[AoaEstimate] = []
    buffer: list[float] = []
    window_idx: int | None = None
    prev_t = -math.inf

    def flush(idx: int) -> None:
        if buffer:
            mean, dispersion = circular_mean(buffer)
            estimates.append(AoaEstimate(
                azimuth_rad=mean,
                sample_count=len(buffer),
                circular_dispersion=dispersion,
                window_end_s=(idx + 1) * window_s,
            ))
            buffer.clear()

    for t, cluster in clusters:
        if t < prev_t:
            raise ValueError(f"cluster stream not time-ordered at t={t}")
        prev_t = t
        idx = math.floor(t / window_s)
        if window_idx is None:
            window_idx = idx
        while idx > window_idx:
            flush(window_idx)
            window_idx += 1
        if cluster.intensity >= model.intensity_threshold and cluster.range_mm <= gate_mm:
            buffer.append(cluster.azimuth_rad)
    if window_idx is not None:
        flush(window_idx)
    return estimates
