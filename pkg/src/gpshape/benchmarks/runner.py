"""Experiment runners behind the CLI: fits, benchmark tables, CSV ingestion.

All runners are deterministic given (config, seed): design points, noise,
and sampler streams derive from the master seed by an injective splitting
rule, aggregation follows fixed index order, and CSV floats are written with
shortest round-trip `repr`.  Wall times go to the JSON-lines run log, never
into the CSVs.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..basis import KnotGrid
from ..constraints import required_kind
from ..estimator import ConstrainedGPRegressor, parse_constraint
from ..kernels import SQUARED_EXPONENTIAL, Kernel
from ..model import ObservationSet, reference_kriging
from ..sampler import derive_rng
from ..tuning import CvConfig, cv_select
from .functions import FUNCTIONS, FUNCTIONS_1D, FUNCTIONS_2D, LOGISTIC_UNIT, BenchmarkFunction

__all__ = [
    "ExperimentConfig",
    "run_rmse_benchmark",
    "run_coverage_benchmark",
    "run_mse2d_benchmark",
    "run_sample_size_sweep",
    "run_cv_selection",
    "fit_csv",
    "write_rows",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("function", "estimator", "metric", "value", "stderr", "replications", "seed")

EVAL_POINTS_1D = 100
COVERAGE_PROBES = tuple(0.5 * k for k in range(1, 11))  # 0.5, 1.0, ..., 5.0
SWEEP_SIZES = (25, 50, 100, 160, 200, 400)


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of one benchmark run; JSON config files mirror these names."""

    function: str | None = None
    dataset: str | None = None
    constraint: str | None = None
    kernel: str = SQUARED_EXPONENTIAL
    variance: float = 1.0
    theta: tuple[float, ...] | None = None
    cv: bool = False
    grid_n: int = 50
    n: int = 100
    noise: float = 1.0
    replications: int = 200
    samples: int = 200
    level: float = 0.95
    holdout: float = 0.2
    holdout_indices: str | None = None
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.theta is not None:
            object.__setattr__(self, "theta", tuple(float(v) for v in np.atleast_1d(self.theta)))

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            payload = json.load(fh)
        unknown = set(payload) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**payload)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return "" if value is None else str(value)


def write_rows(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in CSV_COLUMNS])


def _log_run(out: Path | None, record: dict) -> None:
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "runs.jsonl", "a") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def _row(function, estimator, metric, values, config, reps=None) -> dict:
    values = np.asarray(values, dtype=float)
    reps = values.size if reps is None else reps
    stderr = float(np.std(values, ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
    return {
        "function": function,
        "estimator": estimator,
        "metric": metric,
        "value": float(np.mean(values)),
        "stderr": stderr,
        "replications": reps,
        "seed": config.seed,
    }


def _eval_grid(bf: BenchmarkFunction, points: int = EVAL_POINTS_1D) -> np.ndarray:
    """Equispaced evaluation points, open at the left domain edge."""
    (a, b), = bf.domain
    step = (b - a) / points
    return (a + step * np.arange(1, points + 1))[:, None]


def _function_theta(bf: BenchmarkFunction, config: ExperimentConfig) -> tuple[float, ...]:
    if config.theta is not None:
        if len(config.theta) not in (1, bf.dim):
            raise ValueError("--theta must give one value or one per dimension")
        return config.theta if len(config.theta) == bf.dim else config.theta * bf.dim
    return bf.default_lengthscale


def _make_estimator(bf: BenchmarkFunction, config: ExperimentConfig, center=True, n_grid=None):
    constraint = bf.constraint if config.constraint is None else parse_constraint(config.constraint)
    return ConstrainedGPRegressor(
        constraint=constraint,
        kernel=config.kernel,
        variance=config.variance,
        lengthscale=_function_theta(bf, config),
        grid_size=config.grid_n if n_grid is None else n_grid,
        noise_std=config.noise,
        domain=bf.domain,
        center=center,
    )


def _draw_data(bf: BenchmarkFunction, n: int, noise: float, rng: np.random.Generator):
    box = np.asarray(bf.domain)
    X = rng.uniform(box[:, 0], box[:, 1], size=(n, bf.dim))
    y = bf(X) + noise * rng.standard_normal(n)
    return X, y


def _shape_probes(dim: int) -> int:
    return 1000 if dim == 1 else 32


def _check_shape(est: ConstrainedGPRegressor, label: str) -> None:
    if not est.constraint_satisfied(probes_per_dim=_shape_probes(est.n_features_in_)):
        raise RuntimeError(f"fitted mode violates its shape constraint in {label}")


def _rmse(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sqrt(np.mean((a - b) ** 2)))


def run_rmse_benchmark(config: ExperimentConfig) -> list[dict]:
    """Monotone 1-D accuracy table: mean RMSE of the mode over replications."""
    names = [config.function] if config.function else list(FUNCTIONS_1D)
    started = time.perf_counter()
    rows = []
    for fi, name in enumerate(names):
        bf = FUNCTIONS[name]
        grid = _eval_grid(bf)
        truth = bf(grid)
        per_rep = {"map": [], "map_uncentered": [], "unconstrained_mean": []}
        for rep in range(config.replications):
            rng = derive_rng(config.seed, fi, rep)
            X, y = _draw_data(bf, config.n, config.noise, rng)
            est = _make_estimator(bf, config).fit(X, y)
            _check_shape(est, f"rmse-bench/{name}/rep{rep}")
            per_rep["map"].append(_rmse(est.predict(grid), truth))
            per_rep["unconstrained_mean"].append(_rmse(est.predict_unconstrained(grid), truth))
            raw = _make_estimator(bf, config, center=False).fit(X, y)
            _check_shape(raw, f"rmse-bench/{name}/rep{rep}/uncentered")
            per_rep["map_uncentered"].append(_rmse(raw.predict(grid), truth))
        for estimator, values in per_rep.items():
            rows.append(_row(name, estimator, "rmse", values, config))
    if config.out:
        write_rows(Path(config.out) / "rmse_benchmark.csv", rows)
    _log_run(
        Path(config.out) if config.out else None,
        {"command": "rmse-bench", "config": asdict(config), "wall_time_s": time.perf_counter() - started},
    )
    return rows


def run_coverage_benchmark(config: ExperimentConfig) -> list[dict]:
    """Empirical coverage of 95% pointwise bands on the sinusoidal setup."""
    name = config.function or "sinusoidal"
    bf = FUNCTIONS[name]
    probes = np.asarray(COVERAGE_PROBES)[:, None]
    truth = bf(probes)
    started = time.perf_counter()
    hits = np.zeros((len(COVERAGE_PROBES),))
    hits_ref = np.zeros_like(hits)
    z = float(_normal_quantile(0.5 * (1.0 + config.level)))
    theta = _function_theta(bf, config)
    for rep in range(config.replications):
        rng = derive_rng(config.seed, 0, rep)
        X, y = _draw_data(bf, config.n, config.noise, rng)
        est = _make_estimator(bf, config).fit(X, y)
        _check_shape(est, f"coverage-bench/rep{rep}")
        summary = est.posterior_summary(
            probes, level=config.level, size=config.samples, random_state=derive_rng(config.seed, 1, rep)
        )
        hits += (summary.band_lower <= truth) & (truth <= summary.band_upper)

        kernel = Kernel(config.kernel, variance=config.variance, lengthscales=theta)
        offset = float(np.mean(y))
        mean, var = reference_kriging(kernel, X, y - offset, config.noise, probes)
        sd = np.sqrt(np.maximum(var, 0.0))
        lo, hi = mean + offset - z * sd, mean + offset + z * sd
        hits_ref += (lo <= truth) & (truth <= hi)
    rows = []
    for i, x in enumerate(COVERAGE_PROBES):
        frac = hits[i] / config.replications
        se = float(np.sqrt(max(frac * (1 - frac), 1e-12) / config.replications))
        rows.append(
            {
                "function": name,
                "estimator": "credible_band",
                "metric": f"coverage_at_{x:g}",
                "value": float(frac),
                "stderr": se,
                "replications": config.replications,
                "seed": config.seed,
            }
        )
    for i, x in enumerate(COVERAGE_PROBES):
        frac = hits_ref[i] / config.replications
        se = float(np.sqrt(max(frac * (1 - frac), 1e-12) / config.replications))
        rows.append(
            {
                "function": name,
                "estimator": "reference_kriging",
                "metric": f"coverage_at_{x:g}",
                "value": float(frac),
                "stderr": se,
                "replications": config.replications,
                "seed": config.seed,
            }
        )
    if config.out:
        write_rows(Path(config.out) / "coverage_benchmark.csv", rows)
    _log_run(
        Path(config.out) if config.out else None,
        {"command": "coverage-bench", "config": asdict(config), "wall_time_s": time.perf_counter() - started},
    )
    return rows


def _normal_quantile(p: float) -> float:
    from scipy.stats import norm

    return norm.ppf(p)


def run_mse2d_benchmark(config: ExperimentConfig) -> list[dict]:
    """Isotonic 2-D accuracy table: MSE of the mode on a 32x32 grid."""
    names = [config.function] if config.function else list(FUNCTIONS_2D)
    axis = np.linspace(0.0, 1.0, 32)
    grid = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    started = time.perf_counter()
    rows = []
    for fi, name in enumerate(names):
        bf = FUNCTIONS[name]
        truth = bf(grid)
        per_rep = {"map": [], "unconstrained_mean": []}
        for rep in range(config.replications):
            rng = derive_rng(config.seed, fi, rep)
            X, y = _draw_data(bf, config.n, config.noise, rng)
            est = _make_estimator(bf, config).fit(X, y)
            _check_shape(est, f"mse2d-bench/{name}/rep{rep}")
            per_rep["map"].append(float(np.mean((est.predict(grid) - truth) ** 2)))
            per_rep["unconstrained_mean"].append(
                float(np.mean((est.predict_unconstrained(grid) - truth) ** 2))
            )
        for estimator, values in per_rep.items():
            rows.append(_row(name, estimator, "mse", values, config))
    if config.out:
        write_rows(Path(config.out) / "mse2d_benchmark.csv", rows)
    _log_run(
        Path(config.out) if config.out else None,
        {"command": "mse2d-bench", "config": asdict(config), "wall_time_s": time.perf_counter() - started},
    )
    return rows


def run_sample_size_sweep(config: ExperimentConfig, sizes=SWEEP_SIZES) -> list[dict]:
    """RMSE of the mode for the unit-interval logistic curve vs sample size."""
    bf = FUNCTIONS[config.function] if config.function else LOGISTIC_UNIT
    grid = _eval_grid(bf)
    truth = bf(grid)
    started = time.perf_counter()
    rows = []
    for si, n in enumerate(sizes):
        values = []
        for rep in range(config.replications):
            rng = derive_rng(config.seed, si, rep)
            X, y = _draw_data(bf, n, config.noise, rng)
            est = _make_estimator(bf, config).fit(X, y)
            _check_shape(est, f"sweep/n{n}/rep{rep}")
            values.append(_rmse(est.predict(grid), truth))
        row = _row(bf.name, "map", f"rmse_n{n}", values, config)
        row["median"] = float(np.median(values))
        rows.append(row)
    if config.out:
        write_rows(Path(config.out) / "sample_size_sweep.csv", rows)
    _log_run(
        Path(config.out) if config.out else None,
        {"command": "sweep", "config": asdict(config), "wall_time_s": time.perf_counter() - started},
    )
    return rows


def run_cv_selection(config: ExperimentConfig) -> list[dict]:
    """Leave-one-out lengthscale selection for each benchmark function."""
    names = [config.function] if config.function else list(FUNCTIONS_1D)
    started = time.perf_counter()
    rows = []
    for fi, name in enumerate(names):
        bf = FUNCTIONS[name]
        rng = derive_rng(config.seed, fi, 0)
        X, y = _draw_data(bf, config.n, config.noise, rng)
        constraint = bf.constraint if config.constraint is None else parse_constraint(config.constraint)
        kind = required_kind(constraint, bf.dim)
        domain = _make_estimator(bf, config)._resolve_domain(X)
        U = domain.to_unit(X)
        yc = y - float(np.mean(y))
        cv_cfg = CvConfig.default(bf.dim, width=1.0, points=20 if bf.dim == 1 else 8)
        kernel = cv_select(
            kind,
            KnotGrid(bf.dim, config.grid_n),
            config.kernel,
            ObservationSet(U, yc, config.noise),
            cv_cfg,
            variance=config.variance,
        )
        widths = domain.widths
        for m in range(bf.dim):
            rows.append(
                {
                    "function": name,
                    "estimator": "loo_cv",
                    "metric": f"selected_theta_{m + 1}",
                    "value": float(kernel.lengthscales[m] * widths[m]),
                    "stderr": 0.0,
                    "replications": 1,
                    "seed": config.seed,
                }
            )
            rows.append(
                {
                    "function": name,
                    "estimator": "registry_default",
                    "metric": f"default_theta_{m + 1}",
                    "value": float(bf.default_lengthscale[m]),
                    "stderr": 0.0,
                    "replications": 1,
                    "seed": config.seed,
                }
            )
    if config.out:
        write_rows(Path(config.out) / "cv_selection.csv", rows)
    _log_run(
        Path(config.out) if config.out else None,
        {"command": "cv", "config": asdict(config), "wall_time_s": time.perf_counter() - started},
    )
    return rows


def q_squared(y_true: np.ndarray, y_pred: np.ndarray, baseline: float) -> float:
    """1 - squared prediction error relative to the constant-baseline error."""
    denom = float(np.sum((y_true - baseline) ** 2))
    if denom == 0.0:
        return 1.0 if np.allclose(y_true, y_pred) else -np.inf
    return 1.0 - float(np.sum((y_true - y_pred) ** 2)) / denom


def _read_dataset(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if len(header) < 2 or header[-1] != "y" or any(
            h != f"x{i + 1}" for i, h in enumerate(header[:-1])
        ):
            raise ValueError(f"{path}: line 1: expected header x1,...,xd,y, got {header}")
        d = len(header) - 1
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != d + 1:
                raise ValueError(f"{path}: line {lineno}: expected {d + 1} fields, got {len(record)}")
            try:
                rows.append([float(v) for v in record])
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    data = np.asarray(rows)
    return data[:, :d], data[:, d]


def _holdout_split(config: ExperimentConfig, n: int) -> tuple[np.ndarray, np.ndarray]:
    if config.holdout_indices:
        idx = np.loadtxt(config.holdout_indices, dtype=int, ndmin=1)
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise ValueError("holdout index file refers to rows outside the dataset")
        test = np.unique(idx)
    else:
        k = int(round(config.holdout * n))
        perm = derive_rng(config.seed, 7).permutation(n)
        test = np.sort(perm[:k])
    train = np.setdiff1d(np.arange(n), test)
    if train.size == 0:
        raise ValueError("holdout split leaves no training rows")
    return train, test


def fit_csv(config: ExperimentConfig) -> dict:
    """Fit a dataset, report holdout Q^2, and persist a model artifact.

    The domain is the training hull; holdout rows outside it are listed in
    the report and excluded from the score.  With an empty holdout the score
    is computed on the training rows themselves.
    """
    if not config.dataset:
        raise ValueError("fit requires a dataset path")
    started = time.perf_counter()
    X, y = _read_dataset(config.dataset)
    n, d = X.shape
    train, test = _holdout_split(config, n)
    if test.size == 0:
        test = train
    Xtr, ytr = X[train], y[train]

    constraint = parse_constraint(config.constraint or "none")
    theta = config.theta if config.theta is not None else (1.0,) * d
    if len(theta) == 1 and d > 1:
        theta = theta * d
    est = ConstrainedGPRegressor(
        constraint=constraint,
        kernel=config.kernel,
        variance=config.variance,
        lengthscale=theta,
        grid_size=config.grid_n,
        noise_std=config.noise,
    ).fit(Xtr, ytr)

    lo, hi = np.asarray(est.domain_map_.lower), np.asarray(est.domain_map_.upper)
    inside = np.all((X[test] >= lo - 1e-12) & (X[test] <= hi + 1e-12), axis=1)
    rejected = [int(i) for i in test[~inside]]
    kept = test[inside]
    if kept.size == 0:
        raise ValueError("every holdout row lies outside the training hull")

    baseline = float(np.mean(ytr))
    scores = {
        "map": q_squared(y[kept], est.predict(X[kept]), baseline),
        "unconstrained_mean": q_squared(y[kept], est.predict_unconstrained(X[kept]), baseline),
    }

    name = Path(config.dataset).stem
    rows = [
        {
            "function": name,
            "estimator": estimator,
            "metric": "q2",
            "value": float(score),
            "stderr": 0.0,
            "replications": 1,
            "seed": config.seed,
        }
        for estimator, score in scores.items()
    ]
    artifact = {
        "config": asdict(config),
        "dataset": str(config.dataset),
        "n_rows": n,
        "train_rows": [int(i) for i in train],
        "holdout_rows": [int(i) for i in test],
        "rejected_rows": rejected,
        "domain_lower": [float(v) for v in lo],
        "domain_upper": [float(v) for v in hi],
        "y_offset": est.y_offset_,
        "map_coefficients": [float(v) for v in est.map_coefficients_],
        "mean_coefficients": [float(v) for v in est.mean_coefficients_],
        "posterior_covariance_shape": list(est.posterior_.covariance.shape),
        "q2": scores,
    }
    report = {"rows": rows, "artifact": artifact, "rejected_rows": rejected}
    if config.out:
        out = Path(config.out)
        write_rows(out / "fit_report.csv", rows)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "fit_artifact.json", "w") as fh:
            json.dump(artifact, fh, indent=2, sort_keys=True)
    _log_run(
        Path(config.out) if config.out else None,
        {"command": "fit", "config": asdict(config), "wall_time_s": time.perf_counter() - started,
         "rejected_rows": rejected},
    )
    return report
