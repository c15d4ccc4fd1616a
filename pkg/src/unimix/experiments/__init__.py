"""Configured experiments with deterministic, provenance-stamped reports."""

from .config import ExperimentConfig, build_config, load_config_file
from .report import ExperimentReport
from .runners import (
    run,
    run_bernoulli_mixture,
    run_bound_check,
    run_diagonalize,
    run_divergence,
    run_toy_m,
)

__all__ = [
    "ExperimentConfig", "ExperimentReport", "build_config", "load_config_file", "run",
    "run_bernoulli_mixture", "run_bound_check", "run_diagonalize", "run_divergence", "run_toy_m",
]
