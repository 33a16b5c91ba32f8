"""Command-line benchmark harness.

Subcommands: fit, rmse-bench, coverage-bench, mse2d-bench, sweep, cv.
Settings come from an optional JSON config file (fields mirror
ExperimentConfig) overridden by command-line flags; every run is fully
determined by the config plus --seed.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .runner import (
    ExperimentConfig,
    fit_csv,
    run_coverage_benchmark,
    run_cv_selection,
    run_mse2d_benchmark,
    run_rmse_benchmark,
    run_sample_size_sweep,
)

COMMAND_DEFAULTS = {
    "rmse-bench": {"n": 100, "noise": 1.0, "grid_n": 50, "replications": 200},
    "coverage-bench": {"n": 100, "noise": 1.0, "grid_n": 50, "replications": 200},
    "mse2d-bench": {"n": 1024, "noise": 0.1, "grid_n": 10, "replications": 20},
    "sweep": {"noise": 0.5, "grid_n": 50, "replications": 200},
    "cv": {"n": 100, "noise": 1.0, "grid_n": 50},
    "fit": {"noise": 1.0, "grid_n": 20},
}

RUNNERS = {
    "rmse-bench": run_rmse_benchmark,
    "coverage-bench": run_coverage_benchmark,
    "mse2d-bench": run_mse2d_benchmark,
    "sweep": run_sample_size_sweep,
    "cv": run_cv_selection,
    "fit": fit_csv,
}


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file mirroring ExperimentConfig")
    parser.add_argument("--seed", type=int, help="master seed (default 0)")
    parser.add_argument("--out", help="output directory for CSV results and the run log")
    parser.add_argument("--reps", type=int, dest="replications", help="number of replications")
    parser.add_argument("--n", type=int, help="training sample size per replication")
    parser.add_argument("--grid-n", type=int, dest="grid_n", help="knot subdivisions N")
    parser.add_argument("--noise", type=float, help="observation noise std deviation")
    parser.add_argument(
        "--constraint",
        help="shape constraint: none|increasing|decreasing|convex|convex2d|positive|"
        "bounded:<a>,<b>|isotonic[:<xy flags>]",
    )
    parser.add_argument(
        "--kernel",
        help="covariance family: squared_exponential|matern52|matern32|exponential",
    )
    parser.add_argument(
        "--theta", type=float, nargs="+", help="lengthscale(s) in original input units"
    )
    parser.add_argument("--function", help="restrict a benchmark to one test function id")
    parser.add_argument("--samples", type=int, help="posterior draws per replication")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpshape", description="Shape-constrained GP benchmark harness."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    specs = {
        "fit": "fit a CSV dataset and report holdout Q^2",
        "rmse-bench": "1-D monotone accuracy table (RMSE of the mode)",
        "coverage-bench": "empirical coverage of 95%% credible bands",
        "mse2d-bench": "2-D isotonic accuracy table (MSE of the mode)",
        "sweep": "RMSE vs sample size for the unit-interval logistic curve",
        "cv": "leave-one-out lengthscale selection per benchmark function",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        _add_common_flags(p)
        if name == "fit":
            p.add_argument("dataset", nargs="?", help="CSV file with header x1,...,xd,y")
            p.add_argument("--holdout", type=float, help="holdout fraction (default 0.2)")
            p.add_argument(
                "--holdout-indices", dest="holdout_indices", help="file of 0-based holdout row indices"
            )
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    config = (
        ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    )
    if not args.config:
        config = replace(config, **COMMAND_DEFAULTS[args.command])
    overrides = {}
    for field in (
        "seed", "out", "replications", "n", "grid_n", "noise", "constraint",
        "kernel", "theta", "function", "samples", "dataset", "holdout", "holdout_indices",
    ):
        value = getattr(args, field, None)
        if value is not None:
            overrides[field] = tuple(value) if field == "theta" else value
    return replace(config, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = config_from_args(args)
    result = RUNNERS[args.command](config)
    rows = result["rows"] if isinstance(result, dict) else result
    for row in rows:
        print(
            f"{row['function']:>16s}  {row['estimator']:>20s}  {row['metric']:>16s}  "
            f"value={row['value']:.6g}  stderr={row['stderr']:.3g}"
        )
    if isinstance(result, dict) and result.get("rejected_rows"):
        print(f"rejected out-of-domain holdout rows: {result['rejected_rows']}")
    if config.out:
        print(f"results written to {config.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
