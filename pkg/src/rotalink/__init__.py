"""Deterministic desk-scale simulator of a radar-sensing-aided rotatable
antenna wireless link: lidar detection -> AoA aggregation -> PID servo
alignment -> directional link budget -> 16-QAM reception.
"""

__version__ = "0.1.0"

from .scenario import (AntennaSpec, Pose, Scenario, load_scenario,
                       scenario_to_text, symbol_rate, wrap_angle)
from .lidar import (AoaEstimate, DetectionCluster, RadarModel, aggregate_aoa,
                    circular_mean, decode_cluster, encode_cluster, simulate_scan)
from .control import (PidGains, ServoModel, ServoState, angle_from_pwm,
                      pid_step, pwm_from_angle, servo_step, track)
from .rf import (LinkSample, PatternModel, build_pattern, fspl_db,
                 link_budget, pattern_gain_db, solve_pattern_exponent)
from .modem import (ConstellationFrame, apply_awgn, demap_symbols, evm_rms,
                    map_bits, snr_from_evm)
from .sim import (LoopResult, SweepResult, constellation_experiment,
                  run_closed_loop, sweep_azimuth)

__all__ = [
    "AntennaSpec", "Pose", "Scenario", "load_scenario", "scenario_to_text",
    "symbol_rate", "wrap_angle",
    "AoaEstimate", "DetectionCluster", "RadarModel", "aggregate_aoa",
    "circular_mean", "decode_cluster", "encode_cluster", "simulate_scan",
    "PidGains", "ServoModel", "ServoState", "angle_from_pwm", "pid_step",
    "pwm_from_angle", "servo_step", "track",
    "LinkSample", "PatternModel", "build_pattern", "fspl_db", "link_budget",
    "pattern_gain_db", "solve_pattern_exponent",
    "ConstellationFrame", "apply_awgn", "demap_symbols", "evm_rms",
    "map_bits", "snr_from_evm",
    "LoopResult", "SweepResult", "constellation_experiment",
    "run_closed_loop", "sweep_azimuth",
]
