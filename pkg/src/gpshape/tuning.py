"""Lengthscale selection by cross-validated prediction of the unconstrained mean.

The objective is the mean squared leave-one-out (or k-fold) prediction error
of the data-only posterior mean; the signal variance is fixed by the caller,
since the mode estimate does not depend on it.  LOO residuals use the
single-factorization shortcut e_i = (Q y)_i / Q_ii with
Q = (K + noise^2 I)^{-1} on the model's basis-expansion covariance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from . import linalg
from .basis import KnotGrid
from .exceptions import ConfigurationError
from .kernels import Kernel
from .model import ObservationSet, build_prior, observation_matrix

__all__ = ["CvConfig", "cv_select", "cv_scores", "loo_squared_errors"]


@dataclass(frozen=True)
class CvConfig:
    """Candidate lengthscale grids (one per input dimension) and fold rule."""

    grids: tuple[tuple[float, ...], ...]
    folds: int | str = "loo"

    def __post_init__(self):
        grids = self.grids
        if grids and np.isscalar(grids[0]):
            grids = (tuple(grids),)
        grids = tuple(tuple(float(v) for v in g) for g in grids)
        for g in grids:
            if not g or any(v <= 0 for v in g):
                raise ValueError("lengthscale grids must be nonempty and positive")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise ValueError("lengthscale grids must be strictly increasing")
        object.__setattr__(self, "grids", grids)
        if self.folds != "loo" and (not isinstance(self.folds, int) or self.folds < 2):
            raise ValueError("folds must be 'loo' or an integer >= 2")

    @classmethod
    def default(cls, dim: int, width: float = 1.0, points: int = 20) -> "CvConfig":
        grid = tuple(np.geomspace(0.05 * width, 100.0 * width, points))
        return cls((grid,) * dim)


def _fold_slices(n: int, folds: int | str) -> list[np.ndarray]:
    if folds == "loo":
        return [np.array([i]) for i in range(n)]
    return [idx for idx in np.array_split(np.arange(n), folds) if idx.size]


def loo_squared_errors(
    kind: str, grid: KnotGrid, kernel: Kernel, data: ObservationSet
) -> np.ndarray:
    """Squared LOO residuals via the single-factorization shortcut."""
    A = observation_matrix(kind, grid, data.X)
    prior = build_prior(kind, grid, kernel)
    S = linalg.symmetrize(A @ prior.matrix @ A.T) + data.noise_std**2 * np.eye(data.size)
    L, _ = linalg.jittered_cholesky(S)
    Q = cho_solve((L, True), np.eye(data.size))
    residuals = (Q @ data.y) / np.diag(Q)
    return residuals**2


def _kfold_squared_errors(
    kind: str, grid: KnotGrid, kernel: Kernel, data: ObservationSet, folds: int
) -> np.ndarray:
    from .model import condition, unconstrained_mean

    prior = build_prior(kind, grid, kernel)
    A = observation_matrix(kind, grid, data.X)
    out = np.empty(data.size)
    for idx in _fold_slices(data.size, folds):
        keep = np.setdiff1d(np.arange(data.size), idx)
        post = condition(prior, A[keep], data.y[keep], data.noise_std)
        pred = unconstrained_mean(post, kind, grid, data.X[idx])
        out[idx] = (data.y[idx] - pred) ** 2
    return out


def cv_scores(
    kind: str, grid: KnotGrid, family: str, data: ObservationSet, config: CvConfig,
    variance: float = 1.0,
) -> list[tuple[tuple[float, ...], float]]:
    """Mean squared CV error for every lengthscale combination, in grid order."""
    if data.size < 3:
        raise ConfigurationError("cross-validation needs at least 3 observations")
    if np.all(np.ptp(data.X, axis=0) == 0):
        raise ConfigurationError("design points are all identical")
    dim = data.X.shape[1]
    if len(config.grids) != dim:
        raise ConfigurationError("one lengthscale grid per input dimension is required")
    scores = []
    for combo in itertools.product(*config.grids):
        kernel = Kernel(family, variance=variance, lengthscales=combo)
        if config.folds == "loo":
            errs = loo_squared_errors(kind, grid, kernel, data)
        else:
            errs = _kfold_squared_errors(kind, grid, kernel, data, config.folds)
        scores.append((combo, float(np.mean(errs))))
    return scores


def cv_select(
    kind: str, grid: KnotGrid, family: str, data: ObservationSet, config: CvConfig,
    variance: float = 1.0,
) -> Kernel:
    """Lengthscales minimizing the CV score; ties resolve to the larger values."""
    scores = cv_scores(kind, grid, family, data, config, variance=variance)
    best_combo, best_score = scores[0]
    for combo, score in scores[1:]:
        if score <= best_score:
            best_combo, best_score = combo, score
    return Kernel(family, variance=variance, lengthscales=best_combo)
