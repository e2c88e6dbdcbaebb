"""Servo alignment loop: PID on the pointing error, PWM pulse mapping, and
slew-rate-limited servo motion inside the rotation range.

The controller is positional PID whose output is a commanded-angle step per
update. The default gains are tuned so a 60 degree setpoint step settles to
under 1 degree within a second at the 50 Hz update rate; the per-update
output limit is kept below the servo's slew capability so the commanded
angle never runs ahead of what the servo can follow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .lidar import AoaEstimate
from .scenario import wrap_angle

__all__ = [
    "PidGains",
    "ServoModel",
    "ServoState",
    "TrackSample",
    "TrackResult",
    "pwm_from_angle",
    "angle_from_pwm",
    "pid_step",
    "servo_step",
    "initial_servo_state",
    "track",
]


@dataclass(frozen=True)
class PidGains:
    """PID gains plus anti-windup and per-update output clamps.

    The default derivative gain is zero: the servo reaches each commanded
    step within one 50 Hz tick, so derivative action only injects jitter.
    """

    kp: float = 0.8
    ki: float = 0.05
    kd: float = 0.0
    integral_limit: float = 0.5
    output_limit_rad: float = 0.12

    def __post_init__(self) -> None:
        if self.kp < 0 or self.ki < 0 or self.kd < 0:
            raise ValueError("PID gains must be >= 0")
        if self.integral_limit <= 0 or self.output_limit_rad <= 0:
            raise ValueError("integral_limit and output_limit_rad must be > 0")


@dataclass(frozen=True)
class ServoModel:
    """Servo timing: slew limit (60 degrees per 0.15 s) and PWM mapping."""

    slew_rate_rad_s: float = 6.98
    pwm_min_us: int = 500
    pwm_max_us: int = 2500
    pwm_quantum_us: int = 1

    def __post_init__(self) -> None:
        if not self.slew_rate_rad_s > 0:
            raise ValueError("slew_rate_rad_s must be > 0")
        if not self.pwm_min_us < self.pwm_max_us:
            raise ValueError("pwm_min_us must be below pwm_max_us")
        if self.pwm_quantum_us < 1:
            raise ValueError("pwm_quantum_us must be >= 1")


@dataclass(frozen=True)
class ServoState:
    """Commanded and actual deflection plus the PID internal state."""

    commanded_rad: float = 0.0
    actual_rad: float = 0.0
    pulse_width_us: int = 1500
    integral: float = 0.0
    prev_error_rad: float = 0.0


def pwm_from_angle(theta: float, model: ServoModel, limits: tuple[float, float]) -> int:
    """Map an angle (clamped to the rotation range) linearly onto the PWM span."""
    lo, hi = limits
    clamped = min(max(theta, lo), hi)
    span = model.pwm_max_us - model.pwm_min_us
    pulse = model.pwm_min_us + (clamped - lo) / (hi - lo) * span
    return int(round(pulse / model.pwm_quantum_us)) * model.pwm_quantum_us


def angle_from_pwm(pulse_us: float, model: ServoModel, limits: tuple[float, float]) -> float:
    """Linear inverse of pwm_from_angle (before quantization)."""
    if not model.pwm_min_us <= pulse_us <= model.pwm_max_us:
        raise ValueError(
            f"pulse width {pulse_us} outside [{model.pwm_min_us}, {model.pwm_max_us}] us")
    lo, hi = limits
    span = model.pwm_max_us - model.pwm_min_us
    return lo + (pulse_us - model.pwm_min_us) / span * (hi - lo)


def pid_step(
    gains: PidGains,
    state: ServoState,
    error_rad: float,
    dt_s: float,
) -> tuple[float, ServoState]:
    """One positional PID update; returns (commanded step, updated state).

    Rectangular integration with the integral clamped to +-integral_limit
    and the output clamped to +-output_limit_rad.
    """
    if dt_s <= 0:
        raise ValueError(f"dt_s must be > 0, got {dt_s}")
    integral = state.integral + error_rad * dt_s
    integral = min(max(integral, -gains.integral_limit), gains.integral_limit)
    derivative = (error_rad - state.prev_error_rad) / dt_s
    out = gains.kp * error_rad + gains.ki * integral + gains.kd * derivative
    out = min(max(out, -gains.output_limit_rad), gains.output_limit_rad)
    return out, replace(state, integral=integral, prev_error_rad=error_rad)


def servo_step(
    model: ServoModel,
    state: ServoState,
    dt_s: float,
    limits: tuple[float, float],
) -> ServoState:
    """Move the actual angle toward the commanded angle, slew limited.

    The target is the commanded angle clamped to the rotation range, so the
    actual angle can never leave it; the pulse width tracks the commanded
    angle through the PWM map.
    """
    if dt_s <= 0:
        raise ValueError(f"dt_s must be > 0, got {dt_s}")
    lo, hi = limits
    target = min(max(state.commanded_rad, lo), hi)
    gap = target - state.actual_rad
    step = model.slew_rate_rad_s * dt_s
    if abs(gap) <= step:
        actual = target
    else:
        actual = state.actual_rad + math.copysign(step, gap)
    actual = min(max(actual, lo), hi)
    return replace(
        state,
        actual_rad=actual,
        pulse_width_us=pwm_from_angle(state.commanded_rad, model, limits),
    )


def initial_servo_state(
    model: ServoModel,
    limits: tuple[float, float],
    angle_rad: float = 0.0,
) -> ServoState:
    lo, hi = limits
    angle = min(max(angle_rad, lo), hi)
    return ServoState(
        commanded_rad=angle,
        actual_rad=angle,
        pulse_width_us=pwm_from_angle(angle, model, limits),
    )


@dataclass(frozen=True)
class TrackSample:
    """One control tick: the fields of the loop-trace CSV."""

    t_s: float
    setpoint_rad: float
    commanded_rad: float
    actual_rad: float
    pulse_width_us: int
    error_rad: float


@dataclass(frozen=True)
class TrackResult:
    samples: tuple[TrackSample, ...]
    starved: bool  # True when the AoA stream never produced a setpoint


def track(
    gains: PidGains,
    model: ServoModel,
    limits: tuple[float, float],
    aoa_stream: Sequence[AoaEstimate],
    control_rate_hz: float,
    duration_s: float,
    initial_rad: float = 0.0,
) -> TrackResult:
    """Run the alignment loop against a precomputed AoA estimate stream.

    Ticks run at control_rate_hz from t = 0 to t = duration_s inclusive. At
    each tick the most recent estimate (window_end_s <= t) is the setpoint,
    held between the 1 Hz estimate updates; the PID output is added to the
    commanded angle (clamped to the rotation range) and the servo slews
    toward it. Until the first estimate arrives the servo holds its initial
    angle and the recorded error is zero. An empty stream yields the held
    series with the starved flag set.
    """
    if control_rate_hz <= 0 or duration_s <= 0:
        raise ValueError("control_rate_hz and duration_s must be > 0")
    ends = [est.window_end_s for est in aoa_stream]
    if any(b < a for a, b in zip(ends, ends[1:])):
        raise ValueError("aoa_stream not ordered by window_end_s")
    dt = 1.0 / control_rate_hz
    n_ticks = round(duration_s * control_rate_hz)
    state = initial_servo_state(model, limits, initial_rad)
    setpoint: float | None = None
    next_est = 0
    samples: list[TrackSample] = []
    for k in range(n_ticks + 1):
        t = k * dt
        while next_est < len(aoa_stream) and aoa_stream[next_est].window_end_s <= t:
            setpoint = aoa_stream[next_est].azimuth_rad
            next_est += 1
        if setpoint is None:
            error = 0.0
            state = servo_step(model, state, dt, limits)
        else:
            error = wrap_angle(setpoint - state.actual_rad)
            out, state = pid_step(gains, state, error, dt)
            commanded = min(max(state.commanded_rad + out, limits[0]), limits[1])
            state = replace(state, commanded_rad=commanded)
            state = servo_step(model, state, dt, limits)
        samples.append(TrackSample(
            t_s=t,
            setpoint_rad=setpoint if setpoint is not None else state.actual_rad,
            commanded_rad=state.commanded_rad,
            actual_rad=state.actual_rad,
            pulse_width_us=state.pulse_width_us,
            error_rad=error,
        ))
    return TrackResult(samples=tuple(samples), starved=setpoint is None)
