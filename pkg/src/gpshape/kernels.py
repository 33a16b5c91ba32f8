"""Stationary covariance functions and their mixed partial derivatives.

Multi-dimensional kernels are tensor products of one-dimensional stationary
correlations, one lengthscale per input, scaled by a single signal variance:

    K(x, x') = variance * prod_m rho_m(x_m - x'_m)

Mixed partial derivatives therefore factor across dimensions,

    d^{p+q} K / dx^p d(x')^q = variance * prod_m (-1)^{q_m} rho_m^{(p_m+q_m)}(r_m),

and each family only needs the univariate derivatives rho^{(k)}(r), which are
implemented in closed form below.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import UnsupportedDerivativeError

__all__ = [
    "SQUARED_EXPONENTIAL",
    "MATERN52",
    "MATERN32",
    "EXPONENTIAL",
    "FAMILIES",
    "SMOOTHNESS",
    "Kernel",
    "kernel_value",
    "kernel_deriv",
    "gram",
    "deriv_gram",
]

SQUARED_EXPONENTIAL = "squared_exponential"
MATERN52 = "matern52"
MATERN32 = "matern32"
EXPONENTIAL = "exponential"

FAMILIES = (SQUARED_EXPONENTIAL, MATERN52, MATERN32, EXPONENTIAL)

# Maximum admissible derivative order per argument (None: unlimited).
SMOOTHNESS: dict[str, int | None] = {
    SQUARED_EXPONENTIAL: None,
    MATERN52: 2,
    MATERN32: 1,
    EXPONENTIAL: 0,
}


@dataclass(frozen=True)
class Kernel:
    """A stationary covariance function with per-dimension lengthscales.

    Parameters
    ----------
    family : str
        One of ``FAMILIES``.
    variance : float
        Signal variance (value of K at zero lag).
    lengthscales : float or sequence of float
        One positive lengthscale per input dimension.
    """

    family: str
    variance: float = 1.0
    lengthscales: tuple[float, ...] = field(default=(1.0,))

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if not self.variance > 0:
            raise ValueError("variance must be positive")
        ls = self.lengthscales
        if np.isscalar(ls):
            ls = (float(ls),)
        else:
            ls = tuple(float(v) for v in np.atleast_1d(ls))
        if not ls or any(not v > 0 for v in ls):
            raise ValueError("every lengthscale must be positive")
        object.__setattr__(self, "lengthscales", ls)
        object.__setattr__(self, "variance", float(self.variance))

    @property
    def dim(self) -> int:
        return len(self.lengthscales)

    @property
    def max_order(self) -> int | None:
        """Largest admissible derivative order per argument (None: any)."""
        return SMOOTHNESS[self.family]

    def __call__(self, x, y):
        return kernel_value(self, x, y)

    def deriv(self, x, y, dx, dy):
        return kernel_deriv(self, x, y, dx, dy)


def _hermite(u: np.ndarray, order: int) -> np.ndarray:
    """Probabilists' Hermite polynomial He_order(u) by recurrence."""
    h_prev = np.ones_like(u)
    if order == 0:
        return h_prev
    h = u.copy()
    for k in range(1, order):
        h, h_prev = u * h - k * h_prev, h
    return h


def _corr_deriv(family: str, r: np.ndarray, theta: float, order: int) -> np.ndarray:
    """k-th derivative of the unit-variance correlation rho(r)."""
    if family == SQUARED_EXPONENTIAL:
        u = r / theta
        e = np.exp(-0.5 * u * u)
        if order == 0:
            return e
        return (-1.0) ** order * theta ** (-order) * _hermite(u, order) * e

    s = np.abs(r)
    if family == MATERN32:
        a = np.sqrt(3.0) / theta
        e = np.exp(-a * s)
        if order == 0:
            return (1.0 + a * s) * e
        if order == 1:
            return -(a * a) * r * e
        if order == 2:
            return -(a * a) * (1.0 - a * s) * e
    elif family == MATERN52:
        a = np.sqrt(5.0) / theta
        e = np.exp(-a * s)
        if order == 0:
            return (1.0 + a * s + (a * s) ** 2 / 3.0) * e
        if order == 1:
            return -(a * a / 3.0) * r * (1.0 + a * s) * e
        if order == 2:
            return -(a * a / 3.0) * (1.0 + a * s - (a * s) ** 2) * e
        if order == 3:
            return (a**4 / 3.0) * r * (3.0 - a * s) * e
        if order == 4:
            return (a**4 / 3.0) * (3.0 - 5.0 * a * s + (a * s) ** 2) * e
    elif family == EXPONENTIAL:
        if order == 0:
            return np.exp(-s / theta)
    raise UnsupportedDerivativeError(
        f"derivative order {order} is not available for the {family} family"
    )


def _as_points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        x = x[None]
    if x.shape[-1] != dim:
        if dim == 1:
            return x[..., None]
        raise ValueError(
            f"point has trailing dimension {x.shape[-1]}, kernel expects {dim}"
        )
    return x


def _check_orders(kernel: Kernel, dx, dy) -> tuple[tuple[int, ...], tuple[int, ...]]:
    dx = tuple(int(v) for v in np.atleast_1d(dx))
    dy = tuple(int(v) for v in np.atleast_1d(dy))
    if len(dx) != kernel.dim or len(dy) != kernel.dim:
        raise ValueError("derivative order vectors must have one entry per dimension")
    if any(v < 0 for v in dx + dy):
        raise ValueError("derivative orders must be nonnegative")
    cap = kernel.max_order
    if cap is not None and any(v > cap for v in dx + dy):
        raise UnsupportedDerivativeError(
            f"{kernel.family} admits at most order {cap} per argument, got {dx}, {dy}"
        )
    return dx, dy


def kernel_deriv(kernel: Kernel, x, y, dx, dy):
    """Evaluate d^{|dx|+|dy|} K / dx^dx d(x')^dy at (x, y).

    Parameters
    ----------
    x, y : array_like
        Points with trailing dimension ``kernel.dim`` (broadcast over
        leading axes); scalars are accepted for 1-D kernels.
    dx, dy : int or sequence of int
        Derivative order per dimension in the first and second argument.
    """
    dx, dy = _check_orders(kernel, dx, dy)
    xp = _as_points(x, kernel.dim)
    yp = _as_points(y, kernel.dim)
    out = np.full(np.broadcast_shapes(xp.shape[:-1], yp.shape[:-1]), kernel.variance)
    for m, theta in enumerate(kernel.lengthscales):
        r = xp[..., m] - yp[..., m]
        factor = _corr_deriv(kernel.family, r, theta, dx[m] + dy[m])
        if dy[m] % 2:
            factor = -factor
        out = out * factor
    if out.ndim == 0:
        return float(out)
    return out


def kernel_value(kernel: Kernel, x, y):
    """Evaluate K(x, y); see `kernel_deriv` for the accepted shapes."""
    zeros = (0,) * kernel.dim
    return kernel_deriv(kernel, x, y, zeros, zeros)


def gram(kernel: Kernel, X, Y=None) -> np.ndarray:
    """Covariance matrix K(X, Y) for row-stacked points."""
    X = _as_points(X, kernel.dim)
    Y = X if Y is None else _as_points(Y, kernel.dim)
    return np.atleast_2d(kernel_value(kernel, X[:, None, :], Y[None, :, :]))


def deriv_gram(kernel: Kernel, X, Y, dx, dy) -> np.ndarray:
    """Matrix of mixed kernel derivatives between two point sets."""
    X = _as_points(X, kernel.dim)
    Y = _as_points(Y, kernel.dim)
    return np.atleast_2d(kernel_deriv(kernel, X[:, None, :], Y[None, :, :], dx, dy))
