"""Finite-dimensional GP model: coefficient prior, conditioning, and kriging.

The model represents a zero-mean GP through basis coefficients with a joint
Gaussian prior whose covariance is assembled from the kernel (and its
derivatives, for the derivative-basis layouts) at the knots.  Conditioning
on noisy observations is plain Gaussian conditioning of the coefficient
vector; `reference_kriging` provides the exact-kernel GP regression used as
an oracle for the approximation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve

from . import linalg
from .basis import DERIVATIVE, SECOND_DERIVATIVE, VALUE, KnotGrid, check_kind, design_matrix
from .exceptions import ConditioningError, UnsupportedDerivativeError
from .kernels import Kernel, deriv_gram, gram

__all__ = [
    "CoefficientPrior",
    "CoefficientPosterior",
    "ObservationSet",
    "build_prior",
    "approx_kernel",
    "approx_gram",
    "observation_matrix",
    "condition",
    "unconstrained_mean",
    "reference_kriging",
]


@dataclass(frozen=True)
class CoefficientPrior:
    """Zero-mean Gaussian prior over the coefficient vector."""

    matrix: np.ndarray
    kind: str
    grid: KnotGrid
    jitter: float = 0.0  # base diagonal jitter used when factorizing

    def __post_init__(self):
        matrix = linalg.require_symmetric(np.asarray(self.matrix, dtype=float))
        matrix = linalg.symmetrize(matrix)
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        n = matrix.shape[0]
        base = linalg.JITTER_SCALE * (np.trace(matrix) / n if n else 0.0)
        object.__setattr__(self, "jitter", float(base))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class ObservationSet:
    """Design points in the unit cube, responses, and the noise level."""

    X: np.ndarray
    y: np.ndarray
    noise_std: float

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.atleast_1d(np.asarray(self.y, dtype=float))
        if X.shape[0] != y.shape[0]:
            raise ValueError("X and y must have the same number of rows")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def size(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class CoefficientPosterior:
    """Gaussian law of the coefficients given noisy observations."""

    mean: np.ndarray
    covariance: np.ndarray
    observation_matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = linalg.symmetrize(np.asarray(self.covariance, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape must match the mean length")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def size(self) -> int:
        return self.mean.shape[0]


def _required_order(kind: str) -> int:
    return {VALUE: 0, DERIVATIVE: 1, SECOND_DERIVATIVE: 2}[kind]


def build_prior(kind: str, grid: KnotGrid, kernel: Kernel) -> CoefficientPrior:
    """Assemble the coefficient prior covariance for a model kind.

    * value basis: kernel at the knots (tensor-grid points in 2-D);
    * derivative basis: joint covariance of (value at 0, slopes at knots);
    * second-derivative basis: joint covariance of
      (value at 0, slope at 0, curvatures at knots).
    """
    check_kind(kind, grid.dim)
    if kernel.dim != grid.dim:
        raise ValueError("kernel dimension must match the grid dimension")
    order = _required_order(kind)
    cap = kernel.max_order
    if cap is not None and order > cap:
        raise UnsupportedDerivativeError(
            f"the {kind!r} model needs kernel derivatives of order {order} per argument; "
            f"{kernel.family} admits {cap}"
        )

    knots = grid.knots
    if kind == VALUE:
        if grid.dim == 1:
            pts = knots[:, None]
        else:
            pts = np.stack(np.meshgrid(knots, knots, indexing="ij"), axis=-1).reshape(-1, 2)
        return CoefficientPrior(gram(kernel, pts), kind, grid)

    t = knots[:, None]
    zero = np.zeros((1, 1))
    if kind == DERIVATIVE:
        size = knots.size + 1
        out = np.empty((size, size))
        out[0, 0] = gram(kernel, zero)[0, 0]
        out[0, 1:] = deriv_gram(kernel, zero, t, 0, 1)[0]
        out[1:, 0] = deriv_gram(kernel, t, zero, 1, 0)[:, 0]
        out[1:, 1:] = deriv_gram(kernel, t, t, 1, 1)
        return CoefficientPrior(out, kind, grid)

    size = knots.size + 2
    out = np.empty((size, size))
    out[0, 0] = gram(kernel, zero)[0, 0]
    out[0, 1] = deriv_gram(kernel, zero, zero, 0, 1)[0, 0]
    out[1, 0] = deriv_gram(kernel, zero, zero, 1, 0)[0, 0]
    out[1, 1] = deriv_gram(kernel, zero, zero, 1, 1)[0, 0]
    out[0, 2:] = deriv_gram(kernel, zero, t, 0, 2)[0]
    out[2:, 0] = deriv_gram(kernel, t, zero, 2, 0)[:, 0]
    out[1, 2:] = deriv_gram(kernel, zero, t, 1, 2)[0]
    out[2:, 1] = deriv_gram(kernel, t, zero, 2, 1)[:, 0]
    out[2:, 2:] = deriv_gram(kernel, t, t, 2, 2)
    return CoefficientPrior(out, kind, grid)


def observation_matrix(kind: str, grid: KnotGrid, X) -> np.ndarray:
    """Design matrix mapping coefficients to function values at X."""
    return design_matrix(grid, kind, X)


def approx_gram(prior: CoefficientPrior, X, Y=None) -> np.ndarray:
    """Covariance matrix of the basis-expansion process between point sets."""
    bx = design_matrix(prior.grid, prior.kind, X)
    by = bx if Y is None else design_matrix(prior.grid, prior.kind, Y)
    return bx @ prior.matrix @ by.T

def approx_kernel(prior: CoefficientPrior, x, y) -> float:
    """Covariance of the basis-expansion process between two single points.

    Evaluated in a symmetrized order so that swapping the arguments returns
    the identical floating-point value.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    xy = float(approx_gram(prior, x[None, :], y[None, :])[0, 0])
    yx = float(approx_gram(prior, y[None, :], x[None, :])[0, 0])
    return 0.5 * (xy + yx)


def condition(
    prior: CoefficientPrior, A: np.ndarray, y: np.ndarray, noise_std: float
) -> CoefficientPosterior:
    """Condition the coefficient prior on noisy observations A @ coef = y.

    With S = A G A^T + noise_std^2 I, the posterior is Gaussian with mean
    G A^T S^{-1} y and covariance G - G A^T S^{-1} A G, computed through a
    Cholesky factorization of S.  For noise_std = 0 the factorization is
    attempted without jitter and failure raises ConditioningError.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if A.shape[0] != y.shape[0]:
        raise ValueError("A and y must have the same number of rows")
    if A.shape[1] != prior.size:
        raise ValueError("A column count must match the prior size")
    if noise_std < 0:
        raise ValueError("noise_std must be nonnegative")
    n = y.shape[0]
    if n == 0:
        return CoefficientPosterior(np.zeros(prior.size), prior.matrix.copy(), A)

    B = A @ prior.matrix  # (n, p)
    S = B @ A.T
    S = linalg.symmetrize(S) + noise_std**2 * np.eye(n)
    if noise_std == 0.0:
        try:
            L = np.linalg.cholesky(S)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError(
                "noise-free conditioning failed: the observation covariance is "
                "singular (duplicated or degenerate design points)"
            ) from exc
    else:
        L, _ = linalg.jittered_cholesky(S, base=prior.jitter)
    mean = B.T @ cho_solve((L, True), y)
    cov = prior.matrix - B.T @ cho_solve((L, True), B)
    return CoefficientPosterior(mean, linalg.symmetrize(cov), A)


def unconstrained_mean(
    posterior: CoefficientPosterior, kind: str, grid: KnotGrid, X
) -> np.ndarray:
    """Posterior-mean curve of the basis model given data only."""
    return design_matrix(grid, kind, X) @ posterior.mean


def reference_kriging(
    kernel: Kernel, X, y, noise_std: float, Xnew
) -> tuple[np.ndarray, np.ndarray]:
    """Exact-kernel GP regression (zero prior mean): mean and variance at Xnew.

    Used as the reference the finite-dimensional approximation converges to.
    """
    Xnew = np.atleast_2d(np.asarray(Xnew, dtype=float))
    if Xnew.ndim == 2 and Xnew.shape[1] != kernel.dim:
        raise ValueError(f"prediction points must have dimension {kernel.dim}")
    prior_var = np.array([float(gram(kernel, x[None, :])[0, 0]) for x in Xnew])
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return np.zeros(Xnew.shape[0]), prior_var
    X = np.atleast_2d(X)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    K = gram(kernel, X) + noise_std**2 * np.eye(X.shape[0])
    if noise_std == 0.0:
        try:
            L = np.linalg.cholesky(K)
        except np.linalg.LinAlgError as exc:
            raise ConditioningError("noise-free kriging system is singular") from exc
    else:
        L, _ = linalg.jittered_cholesky(K)
    k = gram(kernel, Xnew, X)  # (m, n)
    alpha = cho_solve((L, True), y)
    mean = k @ alpha
    var = prior_var - np.einsum("ij,ji->i", k, cho_solve((L, True), k.T))
    return mean, var
