import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rotalink.control import (PidGains, ServoModel, ServoState, TrackResult,
                              angle_from_pwm, initial_servo_state, pid_step,
                              pwm_from_angle, servo_step, track)
from rotalink.lidar import AoaEstimate

HALF_PI = math.pi / 2
LIMITS = (-HALF_PI, HALF_PI)


class TestPwmMap:
    def test_midpoint(self):
        assert pwm_from_angle(0.0, ServoModel(), LIMITS) == 1500

    def test_endpoints(self):
        assert pwm_from_angle(HALF_PI, ServoModel(), LIMITS) == 2500
        assert pwm_from_angle(-HALF_PI, ServoModel(), LIMITS) == 500

    def test_clamps_out_of_range(self):
        assert pwm_from_angle(math.pi, ServoModel(), LIMITS) == 2500
        assert pwm_from_angle(-math.pi, ServoModel(), LIMITS) == 500

    @given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
    def test_monotone(self, a, b):
        lo, hi = min(a, b), max(a, b)
        if lo == hi:
            return
        assert (pwm_from_angle(hi, ServoModel(), LIMITS)
                >= pwm_from_angle(lo, ServoModel(), LIMITS))

    def test_inverse_endpoints(self):
        assert angle_from_pwm(1500, ServoModel(), LIMITS) == pytest.approx(0.0, abs=1e-12)
        assert angle_from_pwm(2500, ServoModel(), LIMITS) == pytest.approx(HALF_PI)

    def test_inverse_rejects_out_of_span(self):
        with pytest.raises(ValueError):
            angle_from_pwm(499, ServoModel(), LIMITS)
        with pytest.raises(ValueError):
            angle_from_pwm(2501, ServoModel(), LIMITS)

    def test_round_trip_within_one_quantum(self):
        # quantization bound: (rotation span) / (pwm span) = pi/2000 rad
        model = ServoModel()
        quantum = math.pi / 2000
        rng = np.random.default_rng(1)
        for theta in rng.uniform(-HALF_PI, HALF_PI, size=1000):
            back = angle_from_pwm(pwm_from_angle(theta, model, LIMITS), model, LIMITS)
            assert abs(back - theta) <= quantum

    @given(st.floats(-HALF_PI, HALF_PI))
    def test_round_trip_fuzz(self, theta):
        model = ServoModel()
        back = angle_from_pwm(pwm_from_angle(theta, model, LIMITS), model, LIMITS)
        assert abs(back - theta) <= math.pi / 2000


class TestPidStep:
    def test_zero_error_zero_state(self):
        out, _ = pid_step(PidGains(), ServoState(), 0.0, 0.02)
        assert out == 0.0

    def test_proportional_only(self):
        gains = PidGains(kp=1.0, ki=0.0, kd=0.0)
        out, _ = pid_step(gains, ServoState(), 0.1, 0.02)
        assert out == pytest.approx(0.1)

    def test_integral_accumulation_oracle(self):
        # rectangular integration: 10 steps of e=0.1 at dt=0.02 -> 0.02
        gains = PidGains(kp=0.0, ki=1.0, kd=0.0)
        state = ServoState()
        expected_integral = 0.0
        for _ in range(10):
            out, state = pid_step(gains, state, 0.1, 0.02)
            expected_integral += 0.1 * 0.02
        assert out == pytest.approx(expected_integral)
        assert out == pytest.approx(0.02)

    def test_derivative_term(self):
        gains = PidGains(kp=0.0, ki=0.0, kd=0.05)
        state = ServoState(prev_error_rad=0.05)
        out, _ = pid_step(gains, state, 0.1, 0.02)
        assert out == pytest.approx(min(0.05 * (0.1 - 0.05) / 0.02,
                                        gains.output_limit_rad))

    def test_anti_windup_clamp(self):
        gains = PidGains(kp=0.0, ki=1.0, kd=0.0, integral_limit=0.1)
        state = ServoState()
        for _ in range(100):
            _, state = pid_step(gains, state, 1.0, 0.02)
        assert state.integral == pytest.approx(0.1)

    def test_output_clamp(self):
        out, _ = pid_step(PidGains(), ServoState(), 10.0, 0.02)
        assert out == PidGains().output_limit_rad

    def test_rejects_non_positive_dt(self):
        with pytest.raises(ValueError):
            pid_step(PidGains(), ServoState(), 0.0, 0.0)

    def test_rejects_negative_gain(self):
        with pytest.raises(ValueError):
            PidGains(kp=-1.0)


class TestServoStep:
    def test_fixed_point(self):
        state = initial_servo_state(ServoModel(), LIMITS, 0.5)
        after = servo_step(ServoModel(), state, 0.02, LIMITS)
        assert after.actual_rad == state.actual_rad

    def test_slew_limited_step_oracle(self):
        # min(gap, slew*dt): gap pi/2, step 6.98*0.02 = 0.1396
        state = ServoState(commanded_rad=HALF_PI, actual_rad=0.0)
        after = servo_step(ServoModel(), state, 0.02, LIMITS)
        assert after.actual_rad == pytest.approx(min(HALF_PI, 6.98 * 0.02))
        assert after.actual_rad == pytest.approx(0.1396)

    def test_reaches_target_within_one_step(self):
        state = ServoState(commanded_rad=0.05, actual_rad=0.0)
        after = servo_step(ServoModel(), state, 0.02, LIMITS)
        assert after.actual_rad == 0.05

    def test_commanded_beyond_limit_converges_to_limit(self):
        state = ServoState(commanded_rad=3.0, actual_rad=0.0)
        for _ in range(200):
            state = servo_step(ServoModel(), state, 0.02, LIMITS)
            assert state.actual_rad <= HALF_PI
        assert state.actual_rad == pytest.approx(HALF_PI)

    def test_pulse_tracks_commanded(self):
        state = ServoState(commanded_rad=HALF_PI, actual_rad=0.0)
        after = servo_step(ServoModel(), state, 0.02, LIMITS)
        assert after.pulse_width_us == 2500


def estimate(azimuth_rad, window_end_s):
    return AoaEstimate(azimuth_rad, 10, 0.0, window_end_s)


class TestTrack:
    def test_constant_setpoint_converges_within_a_second(self):
        result = track(PidGains(), ServoModel(), LIMITS,
                       [estimate(math.radians(60), 1.0)], 50.0, 4.0)
        target = math.radians(60)
        late = [s for s in result.samples if s.t_s >= 2.0]
        assert all(abs(s.actual_rad - target) < math.radians(1) for s in late)
        assert not result.starved

    def test_setpoint_at_initial_angle_holds(self):
        result = track(PidGains(), ServoModel(), LIMITS,
                       [estimate(0.3, 1.0)], 50.0, 3.0, initial_rad=0.3)
        assert all(s.actual_rad == 0.3 for s in result.samples)

    def test_step_setpoint_monotone_with_bounded_overshoot(self):
        stream = [estimate(0.0, 1.0), estimate(math.radians(60), 2.0)]
        result = track(PidGains(), ServoModel(), LIMITS, stream, 50.0, 6.0)
        target = math.radians(60)
        after = [s.actual_rad for s in result.samples if s.t_s >= 2.0]
        peak = max(after)
        peak_idx = after.index(peak)
        assert all(after[i + 1] >= after[i] - 1e-12 for i in range(peak_idx))
        assert peak - target < math.radians(5)
        assert abs(after[-1] - target) < math.radians(1)

    def test_empty_stream_starves(self):
        result = track(PidGains(), ServoModel(), LIMITS, [], 50.0, 2.0)
        assert result.starved
        assert all(s.actual_rad == 0.0 for s in result.samples)

    def test_unordered_stream_rejected(self):
        stream = [estimate(0.1, 2.0), estimate(0.2, 1.0)]
        with pytest.raises(ValueError):
            track(PidGains(), ServoModel(), LIMITS, stream, 50.0, 3.0)

    def test_slew_bound_between_samples(self):
        stream = [estimate(math.radians(80), 1.0), estimate(math.radians(-80), 2.0)]
        result = track(PidGains(), ServoModel(), LIMITS, stream, 50.0, 4.0)
        dt = 0.02
        bound = ServoModel().slew_rate_rad_s * dt + 1e-12
        for a, b in zip(result.samples, result.samples[1:]):
            assert abs(b.actual_rad - a.actual_rad) <= bound

    def test_kp_only_steady_state_reaches_setpoint(self):
        gains = PidGains(kp=0.8, ki=0.0, kd=0.0)
        result = track(gains, ServoModel(), LIMITS,
                       [estimate(0.7, 1.0)], 50.0, 6.0)
        final = result.samples[-1]
        assert abs(final.commanded_rad - 0.7) < math.pi / 2000

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.floats(-math.pi, math.pi), min_size=1, max_size=6),
           st.integers(0, 2**16))
    def test_actual_never_leaves_rotation_range(self, setpoints, _seed):
        stream = [estimate(sp, 0.5 * (i + 1)) for i, sp in enumerate(setpoints)]
        result = track(PidGains(), ServoModel(), LIMITS, stream, 50.0,
                       0.5 * (len(setpoints) + 2))
        for s in result.samples:
            assert LIMITS[0] <= s.actual_rad <= LIMITS[1]
