"""Experiment configuration, bench geometry, and the shared angle convention.

Conventions used throughout the package: azimuth 0 rad is the fixed
antenna's boresight, positive angles counter-clockwise, every stored angle
normalized to (-pi, pi]. Powers are dBm, frequencies Hz, distances meters,
times seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

__all__ = [
    "ConfigParseError",
    "ConfigValidationError",
    "Scenario",
    "Pose",
    "AntennaSpec",
    "wrap_angle",
    "symbol_rate",
    "load_scenario",
    "scenario_to_text",
]


class ConfigParseError(ValueError):
    """Configuration text is malformed (bad line, unknown key, bad number)."""


class ConfigValidationError(ValueError):
    """A configuration value violates a field constraint."""


def wrap_angle(theta: float) -> float:
    """Reduce an angle to the unique congruent value in (-pi, pi]."""
    if not math.isfinite(theta):
        raise ValueError(f"angle must be finite, got {theta!r}")
    w = math.fmod(theta, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    elif w > math.pi:
        w -= 2.0 * math.pi
    return w


def symbol_rate(bit_rate_bps: float, bits_per_symbol: int) -> float:
    """Symbol rate implied by a bit rate and a modulation order."""
    if bits_per_symbol < 1:
        raise ValueError(f"bits_per_symbol must be >= 1, got {bits_per_symbol}")
    return bit_rate_bps / bits_per_symbol


@dataclass(frozen=True)
class Scenario:
    """Link-experiment configuration, defaulting to the 4 m / 5.8 GHz bench.

    All fields can be overridden through the key=value configuration text
    accepted by :func:`load_scenario`.
    """

    carrier_hz: float = 5.8e9
    tx_power_dbm: float = 10.0
    bandwidth_hz: float = 1.0e5
    noise_floor_dbm: float = -95.0
    bit_rate_bps: float = 5.0e5
    link_distance_m: float = 4.0
    rotation_min_rad: float = -math.pi / 2
    rotation_max_rad: float = math.pi / 2
    radar_scan_hz: float = 10.0
    aoa_window_s: float = 1.0
    control_rate_hz: float = 50.0
    seed: int = 0

    def __post_init__(self) -> None:
        for key in ("carrier_hz", "bandwidth_hz", "bit_rate_bps", "link_distance_m",
                    "radar_scan_hz", "control_rate_hz", "aoa_window_s"):
            value = getattr(self, key)
            if not (math.isfinite(value) and value > 0):
                raise ConfigValidationError(f"{key} must be finite and > 0, got {value}")
        for key in ("tx_power_dbm", "noise_floor_dbm", "rotation_min_rad", "rotation_max_rad"):
            if not math.isfinite(getattr(self, key)):
                raise ConfigValidationError(f"{key} must be finite, got {getattr(self, key)}")
        if not self.rotation_min_rad < self.rotation_max_rad:
            raise ConfigValidationError(
                "rotation_min_rad/rotation_max_rad: empty rotation interval "
                f"[{self.rotation_min_rad}, {self.rotation_max_rad}]")
        if self.rotation_min_rad < -math.pi or self.rotation_max_rad > math.pi:
            raise ConfigValidationError(
                "rotation_min_rad/rotation_max_rad: limits must lie within [-pi, pi]")
        if self.aoa_window_s * self.radar_scan_hz < 1.0:
            raise ConfigValidationError(
                "aoa_window_s: window too short, needs at least one radar scan "
                f"(aoa_window_s * radar_scan_hz = {self.aoa_window_s * self.radar_scan_hz})")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigValidationError(f"seed must be a non-negative integer, got {self.seed!r}")

    @property
    def rotation_range(self) -> tuple[float, float]:
        return (self.rotation_min_rad, self.rotation_max_rad)


@dataclass(frozen=True)
class Pose:
    """Receiver position in the radar plane: azimuth from boresight-zero, range."""

    azimuth_rad: float
    range_m: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "azimuth_rad", wrap_angle(self.azimuth_rad))
        if not (math.isfinite(self.range_m) and self.range_m >= 0):
            raise ValueError(f"range_m must be finite and >= 0, got {self.range_m}")


@dataclass(frozen=True)
class AntennaSpec:
    """Directional TX antenna and omni RX dipole gains.

    The RX dipole is modeled as an ideal half-wave dipole (2.15 dBi) because
    only its type is known; both gains are configurable.
    """

    peak_gain_dbi: float = 10.0
    hpbw_rad: float = math.pi / 3
    sidelobe_floor_dbi: float = -10.0
    rx_gain_dbi: float = 2.15

    def __post_init__(self) -> None:
        if not 0 < self.hpbw_rad < math.pi:
            raise ValueError(f"hpbw_rad must be in (0, pi), got {self.hpbw_rad}")
        if not self.sidelobe_floor_dbi < self.peak_gain_dbi:
            raise ValueError(
                f"sidelobe_floor_dbi ({self.sidelobe_floor_dbi}) must be below "
                f"peak_gain_dbi ({self.peak_gain_dbi})")


_SCENARIO_KEYS = tuple(f.name for f in fields(Scenario))


def load_scenario(text: str) -> Scenario:
    """Parse key=value configuration text into a Scenario.

    Empty text yields the default Scenario. ``#`` starts a comment. Keys
    are exactly the Scenario field names; anything else is rejected.
    """
    values: dict[str, float | int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigParseError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key = key.strip()
        value = value.strip()
        if key not in _SCENARIO_KEYS:
            raise ConfigParseError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigParseError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = int(value) if key == "seed" else float(value)
        except ValueError:
            raise ConfigParseError(
                f"line {lineno}: non-numeric value for {key!r}: {value!r}") from None
    return Scenario(**values)


def scenario_to_text(scn: Scenario) -> str:
    """Serialize a Scenario so that load_scenario(text) round-trips exactly."""
    lines = [f"{name} = {getattr(scn, name)!r}" for name in _SCENARIO_KEYS]
    return "\n".join(lines) + "\n"
