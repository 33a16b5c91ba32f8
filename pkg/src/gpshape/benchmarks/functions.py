"""Registry of shape-constrained test functions used by the benchmarks.

Every entry declares its domain, the constraint it satisfies, and a default
lengthscale (per input, in original units) selected by leave-one-out
cross-validation at the reference sample size of each benchmark.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..constraints import Isotonic, Monotone, ShapeConstraint

__all__ = ["BenchmarkFunction", "FUNCTIONS", "FUNCTIONS_1D", "FUNCTIONS_2D"]


@dataclass(frozen=True)
class BenchmarkFunction:
    name: str
    fn: Callable[..., np.ndarray]
    domain: tuple[tuple[float, float], ...]
    constraint: ShapeConstraint
    default_lengthscale: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.domain)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self.fn(*(X[:, m] for m in range(self.dim)))


def _one_d(name, fn, theta):
    return BenchmarkFunction(name, fn, ((0.0, 10.0),), Monotone("increasing"), (theta,))


def _two_d(name, fn, theta):
    return BenchmarkFunction(name, fn, ((0.0, 1.0), (0.0, 1.0)), Isotonic((True, True)), theta)


FUNCTIONS_1D = {
    f.name: f
    for f in (
        _one_d("flat", lambda x: np.full_like(x, 3.0), 100.0),
        _one_d("sinusoidal", lambda x: 0.32 * (x + np.sin(x)), 2.5),
        _one_d("step", lambda x: np.where(x <= 8.0, 3.0, 8.0), 0.8),
        _one_d("linear", lambda x: 0.3 * x, 8.6),
        _one_d("exponential", lambda x: 0.15 * np.exp(0.6 * x - 3.0), 1.0),
        _one_d("logistic", lambda x: 3.0 / (1.0 + np.exp(-2.0 * x + 10.0)), 2.0),
    )
}

# Logistic curve on the unit interval, used for the sample-size sweep.
LOGISTIC_UNIT = BenchmarkFunction(
    "logistic_unit",
    lambda x: 2.0 / (1.0 + np.exp(-8.0 * x + 4.0)),
    ((0.0, 1.0),),
    Monotone("increasing"),
    (0.35,),
)


def _quarter_sphere(x1, x2):
    r2 = (x1 - 1.0) ** 2 + (x2 - 1.0) ** 2
    return np.where(r2 < 1.0, np.sqrt(np.maximum(0.0, 1.0 - r2)), 0.0)


FUNCTIONS_2D = {
    f.name: f
    for f in (
        _two_d("sqrt_x1", lambda x1, x2: np.sqrt(x1), (0.17, 0.38)),
        _two_d("linear_blend", lambda x1, x2: 0.5 * x1 + 0.5 * x2, (0.46, 1.32)),
        _two_d("min_coord", lambda x1, x2: np.minimum(x1, x2), (0.18, 0.22)),
        _two_d(
            "diagonal_step",
            lambda x1, x2: 0.25 * x1 + 0.25 * x2 + 0.5 * (x1 + x2 > 1.0),
            (0.38, 0.01),
        ),
        _two_d(
            "corner_step",
            lambda x1, x2: 0.25 * x1 + 0.25 * x2 + 0.5 * (np.minimum(x1, x2) > 0.5),
            (0.08, 0.09),
        ),
        _two_d("quarter_sphere", _quarter_sphere, (0.02, 0.17)),
    )
}

FUNCTIONS: dict[str, BenchmarkFunction] = {
    **FUNCTIONS_1D,
    LOGISTIC_UNIT.name: LOGISTIC_UNIT,
    **FUNCTIONS_2D,
}
