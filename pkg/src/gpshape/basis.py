"""Uniform knot grids, hat basis functions, their primitives, and design rows.

Three coefficient layouts are supported, selected by a model kind:

* ``VALUE``: one coefficient per knot (row-major over the tensor grid in 2-D);
  the function is the piecewise-(bi)linear interpolant of its coefficients.
* ``DERIVATIVE`` (1-D): coefficients (offset, slopes at knots); the basis row
  is (1, I_0(x), ..., I_N(x)) with I_j the running integral of hat j.
* ``SECOND_DERIVATIVE`` (1-D): coefficients (offset, initial slope,
  curvatures at knots); the basis row is (1, x, J_0(x), ..., J_N(x)) with
  J_j the twice-iterated integral of hat j.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "VALUE",
    "DERIVATIVE",
    "SECOND_DERIVATIVE",
    "MODEL_KINDS",
    "KnotGrid",
    "DomainMap",
    "hat",
    "hat_primitive",
    "hat_second_primitive",
    "design_row",
    "design_matrix",
]

VALUE = "value"
DERIVATIVE = "derivative"
SECOND_DERIVATIVE = "second_derivative"
MODEL_KINDS = (VALUE, DERIVATIVE, SECOND_DERIVATIVE)


def check_kind(kind: str, dim: int) -> None:
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; choose from {MODEL_KINDS}")
    if kind != VALUE and dim != 1:
        raise ValueError(f"model kind {kind!r} is only defined in one dimension")
    if kind == VALUE and dim not in (1, 2):
        raise ValueError("value-basis models support one or two dimensions")


@dataclass(frozen=True)
class KnotGrid:
    """N+1 uniform knots j/N per dimension on the unit cube."""

    dim: int
    subdivisions: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.subdivisions < 1:
            raise ValueError("subdivisions must be >= 1")

    @property
    def spacing(self) -> float:
        return 1.0 / self.subdivisions

    @cached_property
    def knots(self) -> np.ndarray:
        k = np.linspace(0.0, 1.0, self.subdivisions + 1)
        k.flags.writeable = False
        return k

    def coefficient_count(self, kind: str) -> int:
        check_kind(kind, self.dim)
        n_knots = self.subdivisions + 1
        if kind == VALUE:
            return n_knots**self.dim
        if kind == DERIVATIVE:
            return n_knots + 1
        return n_knots + 2


@dataclass(frozen=True)
class DomainMap:
    """Per-dimension affine map between a box [a_m, b_m] and [0, 1]."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lower) != len(upper):
            raise ValueError("lower and upper must have the same length")
        if any(b <= a for a, b in zip(lower, upper)):
            raise ValueError("every upper bound must exceed its lower bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def unit(cls, dim: int) -> "DomainMap":
        return cls((0.0,) * dim, (1.0,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> np.ndarray:
        return np.array(self.upper) - np.array(self.lower)

    def to_unit(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        U = (X - np.array(self.lower)) / self.widths
        if np.any(U < -1e-12) or np.any(U > 1.0 + 1e-12):
            raise ValueError("points outside the domain box cannot be mapped")
        return np.clip(U, 0.0, 1.0)

    def from_unit(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        return np.array(self.lower) + U * self.widths


def _ramp_integral(u: np.ndarray) -> np.ndarray:
    """F(u) = integral of the standard hat max(0, 1-|v|) from -1 to u."""
    a = np.clip(u, -1.0, 0.0)
    b = np.clip(u, 0.0, 1.0)
    return 0.5 * (a + 1.0) ** 2 + b - 0.5 * b * b


def _ramp_double_integral(u: np.ndarray) -> np.ndarray:
    """G(u) = integral of F from -1 to u."""
    a = np.clip(u, -1.0, 0.0)
    b = np.clip(u, 0.0, 1.0)
    tail = np.maximum(u - 1.0, 0.0)
    return (a + 1.0) ** 3 / 6.0 + 0.5 * b + 0.5 * b * b - b**3 / 6.0 + tail


def _check_unit_scalar(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12):
        raise ValueError("evaluation points must lie in [0, 1]")
    return np.clip(x, 0.0, 1.0)


def _check_index(grid: KnotGrid, j: int) -> int:
    j = int(j)
    if not 0 <= j <= grid.subdivisions:
        raise ValueError(f"knot index {j} out of range 0..{grid.subdivisions}")
    return j


def hat(grid: KnotGrid, j: int, x):
    """Hat function of knot j: 1 at knot j, 0 at all other knots."""
    j = _check_index(grid, j)
    x = _check_unit_scalar(x)
    u = (x - grid.knots[j]) / grid.spacing
    out = np.maximum(0.0, 1.0 - np.abs(u))
    return out if out.ndim else float(out)


def hat_primitive(grid: KnotGrid, j: int, x):
    """Integral of hat j from 0 to x; piecewise quadratic, nondecreasing."""
    j = _check_index(grid, j)
    x = _check_unit_scalar(x)
    d = grid.spacing
    u = (x - grid.knots[j]) / d
    out = d * (_ramp_integral(u) - (0.5 if j == 0 else 0.0))
    return out if out.ndim else float(out)


def hat_second_primitive(grid: KnotGrid, j: int, x):
    """Twice-iterated integral of hat j; zero value and slope at x = 0."""
    j = _check_index(grid, j)
    x = _check_unit_scalar(x)
    d = grid.spacing
    u = (x - grid.knots[j]) / d
    out = d * d * _ramp_double_integral(u)
    if j == 0:
        out = out - d * d / 6.0 - 0.5 * d * x
    return out if out.ndim else float(out)


def _hat_matrix(grid: KnotGrid, x: np.ndarray) -> np.ndarray:
    u = (x[:, None] - grid.knots[None, :]) / grid.spacing
    return np.maximum(0.0, 1.0 - np.abs(u))


def _primitive_matrix(grid: KnotGrid, x: np.ndarray) -> np.ndarray:
    d = grid.spacing
    u = (x[:, None] - grid.knots[None, :]) / d
    out = d * _ramp_integral(u)
    out[:, 0] -= 0.5 * d
    return out


def _second_primitive_matrix(grid: KnotGrid, x: np.ndarray) -> np.ndarray:
    d = grid.spacing
    u = (x[:, None] - grid.knots[None, :]) / d
    out = d * d * _ramp_double_integral(u)
    out[:, 0] -= d * d / 6.0 + 0.5 * d * x
    return out


def design_matrix(grid: KnotGrid, kind: str, X) -> np.ndarray:
    """Stack design rows for points X of shape (n, dim) (or (n,) in 1-D)."""
    check_kind(kind, grid.dim)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[1] != grid.dim:
        raise ValueError(f"expected points of dimension {grid.dim}, got shape {X.shape}")
    X = _check_unit_scalar(X)
    if kind == VALUE:
        if grid.dim == 1:
            return _hat_matrix(grid, X[:, 0])
        h1 = _hat_matrix(grid, X[:, 0])
        h2 = _hat_matrix(grid, X[:, 1])
        return np.einsum("ni,nj->nij", h1, h2).reshape(X.shape[0], -1)
    x = X[:, 0]
    ones = np.ones((X.shape[0], 1))
    if kind == DERIVATIVE:
        return np.hstack([ones, _primitive_matrix(grid, x)])
    return np.hstack([ones, x[:, None], _second_primitive_matrix(grid, x)])


def design_row(grid: KnotGrid, kind: str, x) -> np.ndarray:
    """Basis row mapping the coefficient vector to the function value at x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return design_matrix(grid, kind, x[None, :])[0]
