"""Benchmark harness: test functions, experiment runners, and the CLI."""

from .functions import FUNCTIONS, BenchmarkFunction
from .runner import (
    ExperimentConfig,
    fit_csv,
    run_coverage_benchmark,
    run_cv_selection,
    run_mse2d_benchmark,
    run_rmse_benchmark,
    run_sample_size_sweep,
)

__all__ = [
    "FUNCTIONS",
    "BenchmarkFunction",
    "ExperimentConfig",
    "fit_csv",
    "run_coverage_benchmark",
    "run_cv_selection",
    "run_mse2d_benchmark",
    "run_rmse_benchmark",
    "run_sample_size_sweep",
]
