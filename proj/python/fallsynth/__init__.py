"""Synthetic accelerometer evaluation toolkit."""

from ._fallsynth import (
    ConfigError,
    DataError,
    Error,
    NumericError,
    coverage,
    format_percent_delta,
    generate_fixture,
    generate_prompts,
    jsd,
    joint_index_for,
    joint_to_accel,
    ks_two_sample,
    percent_delta,
    plan_mix,
    read_accel_csv,
    run_experiment,
    slide_windows,
    write_accel_csv,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "NumericError",
    "coverage",
    "format_percent_delta",
    "generate_fixture",
    "generate_prompts",
    "jsd",
    "joint_index_for",
    "joint_to_accel",
    "ks_two_sample",
    "percent_delta",
    "plan_mix",
    "read_accel_csv",
    "run_experiment",
    "slide_windows",
    "write_accel_csv",
]
