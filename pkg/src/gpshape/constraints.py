"""Shape constraints as finite linear inequality systems on the coefficients.

Each supported shape property of the basis-expansion model is equivalent to
finitely many bound / difference / second-difference rows on the coefficient
vector; `encode` builds that system, `is_member` tests a vector against it,
and `check_function_shape` independently verifies the property of the
reconstructed function on a dense probe grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import DERIVATIVE, SECOND_DERIVATIVE, VALUE, KnotGrid, check_kind, design_matrix
from .exceptions import ConfigurationError

__all__ = [
    "Bounded",
    "Monotone",
    "Convex",
    "Isotonic",
    "ConvexAlongAxes",
    "Unconstrained",
    "LinearInequalitySystem",
    "encode",
    "is_member",
    "membership_mask",
    "default_tolerance",
    "check_function_shape",
    "required_kind",
]

INCREASING = "increasing"
DECREASING = "decreasing"


@dataclass(frozen=True)
class Bounded:
    """a <= f(x) <= b everywhere; at least one bound finite."""

    lower: float = -np.inf
    upper: float = np.inf

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("lower bound must be strictly below upper bound")
        if not (np.isfinite(self.lower) or np.isfinite(self.upper)):
            raise ValueError("at least one bound must be finite")


@dataclass(frozen=True)
class Monotone:
    """Monotone in one dimension (derivative-basis model)."""

    direction: str = INCREASING

    def __post_init__(self):
        if self.direction not in (INCREASING, DECREASING):
            raise ValueError(f"direction must be {INCREASING!r} or {DECREASING!r}")


@dataclass(frozen=True)
class Convex:
    """Convex in one dimension (second-derivative-basis model)."""


@dataclass(frozen=True)
class Isotonic:
    """Nondecreasing in the flagged inputs of a 2-D value-basis model."""

    increasing: tuple[bool, bool] = (True, True)

    def __post_init__(self):
        flags = tuple(bool(v) for v in self.increasing)
        if len(flags) != 2 or not any(flags):
            raise ValueError("Isotonic needs two flags with at least one set")
        object.__setattr__(self, "increasing", flags)


@dataclass(frozen=True)
class ConvexAlongAxes:
    """Axis-wise convexity of a 2-D value-basis model.

    Only curvature along each coordinate axis is constrained; the cross
    curvature of the bilinear interpolant is left free, and the paired
    verifier checks exactly the same axis-wise property.
    """


@dataclass(frozen=True)
class Unconstrained:
    """No shape constraint (empty system)."""


ShapeConstraint = Bounded | Monotone | Convex | Isotonic | ConvexAlongAxes | Unconstrained


@dataclass(frozen=True)
class LinearInequalitySystem:
    """Rows `lower <= matrix @ coef <= upper` plus a feasible witness point."""

    matrix: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    witness: np.ndarray

    def __post_init__(self):
        matrix = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        witness = np.atleast_1d(np.asarray(self.witness, dtype=float))
        if matrix.size == 0:
            matrix = matrix.reshape(0, witness.size)
        rows, cols = matrix.shape
        if lower.shape != (rows,) or upper.shape != (rows,):
            raise ValueError("bound vectors must have one entry per row")
        if witness.shape != (cols,):
            raise ValueError("witness length must match the coefficient count")
        if np.any(lower > upper):
            raise ValueError("row lower bounds must not exceed upper bounds")
        if rows and np.max(np.count_nonzero(matrix, axis=1)) > 3:
            raise ValueError("rows must have at most 3 nonzero entries")
        for arr in (matrix, lower, upper, witness):
            arr.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "witness", witness)
        if rows:
            vals = matrix @ witness
            bad = np.flatnonzero((vals < lower - 1e-9) | (vals > upper + 1e-9))
            if bad.size:
                raise ValueError(f"witness violates row {bad[0]}")

    @property
    def n_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_coefficients(self) -> int:
        return self.matrix.shape[1]


def required_kind(constraint: ShapeConstraint, dim: int) -> str:
    """Model kind a constraint applies to; raises on an impossible pairing."""
    if isinstance(constraint, (Bounded, Unconstrained)):
        return VALUE
    if isinstance(constraint, Monotone):
        if dim != 1:
            raise ConfigurationError("Monotone applies to one-dimensional models")
        return DERIVATIVE
    if isinstance(constraint, Convex):
        if dim != 1:
            raise ConfigurationError("Convex applies to one-dimensional models")
        return SECOND_DERIVATIVE
    if isinstance(constraint, (Isotonic, ConvexAlongAxes)):
        if dim != 2:
            raise ConfigurationError(f"{type(constraint).__name__} applies to 2-D models")
        return VALUE
    raise ConfigurationError(f"unknown constraint {constraint!r}")


def _require_compatible(constraint: ShapeConstraint, grid: KnotGrid, kind: str) -> None:
    check_kind(kind, grid.dim)
    if isinstance(constraint, Unconstrained):
        return
    needed = required_kind(constraint, grid.dim)
    if kind != needed:
        raise ConfigurationError(
            f"{type(constraint).__name__} requires the {needed!r} model kind, got {kind!r}"
        )


def encode(constraint: ShapeConstraint, grid: KnotGrid, kind: str) -> LinearInequalitySystem:
    """Build the inequality system equivalent to the shape constraint.

    Row order is fixed (and documented per branch) so that encoding is
    bit-deterministic.
    """
    _require_compatible(constraint, grid, kind)
    p = grid.coefficient_count(kind)
    n = grid.subdivisions

    def system(rows, lower, upper, witness):
        matrix = np.asarray(rows, dtype=float).reshape(len(rows), p)
        return LinearInequalitySystem(matrix, np.asarray(lower, float), np.asarray(upper, float), witness)

    if isinstance(constraint, Unconstrained):
        return LinearInequalitySystem(np.zeros((0, p)), np.zeros(0), np.zeros(0), np.zeros(p))

    if isinstance(constraint, Bounded):
        matrix = np.eye(p)
        lower = np.full(p, constraint.lower)
        upper = np.full(p, constraint.upper)
        if np.isfinite(constraint.lower) and np.isfinite(constraint.upper):
            level = 0.5 * (constraint.lower + constraint.upper)
        elif np.isfinite(constraint.lower):
            level = constraint.lower
        else:
            level = constraint.upper
        return LinearInequalitySystem(matrix, lower, upper, np.full(p, level))

    if isinstance(constraint, Monotone):
        # One row per slope coefficient; the offset stays free.
        rows = [_unit_row(p, 1 + j) for j in range(n + 1)]
        if constraint.direction == INCREASING:
            return system(rows, np.zeros(n + 1), np.full(n + 1, np.inf), np.zeros(p))
        return system(rows, np.full(n + 1, -np.inf), np.zeros(n + 1), np.zeros(p))

    if isinstance(constraint, Convex):
        # One row per curvature coefficient; offset and initial slope free.
        rows = [_unit_row(p, 2 + j) for j in range(n + 1)]
        return system(rows, np.zeros(n + 1), np.full(n + 1, np.inf), np.zeros(p))

    stride = n + 1  # row-major (i, j) -> i * stride + j, i along the first input

    if isinstance(constraint, Isotonic):
        # Interior rows for each flagged axis (i, j = 1..N), then the j = 0
        # edge for the first axis and the i = 0 edge for the second.
        rows = []
        inc1, inc2 = constraint.increasing
        if inc1:
            for i in range(1, n + 1):
                for j in range(1, n + 1):
                    rows.append(_diff_row(p, i * stride + j, (i - 1) * stride + j))
        if inc2:
            for i in range(1, n + 1):
                for j in range(1, n + 1):
                    rows.append(_diff_row(p, i * stride + j, i * stride + j - 1))
        if inc1:
            for i in range(1, n + 1):
                rows.append(_diff_row(p, i * stride, (i - 1) * stride))
        if inc2:
            for j in range(1, n + 1):
                rows.append(_diff_row(p, j, j - 1))
        m = len(rows)
        return system(rows, np.zeros(m), np.full(m, np.inf), np.zeros(p))

    if isinstance(constraint, ConvexAlongAxes):
        # Uniform spacing cancels the slope denominators, leaving plain
        # second-difference rows along each axis; interior rows first, then
        # the j = 0 and i = 0 edges.
        rows = []
        for i in range(1, n):
            for j in range(1, n + 1):
                rows.append(_second_diff_row(p, (i + 1) * stride + j, i * stride + j, (i - 1) * stride + j))
        for i in range(1, n + 1):
            for j in range(1, n):
                rows.append(_second_diff_row(p, i * stride + j + 1, i * stride + j, i * stride + j - 1))
        for i in range(1, n):
            rows.append(_second_diff_row(p, (i + 1) * stride, i * stride, (i - 1) * stride))
        for j in range(1, n):
            rows.append(_second_diff_row(p, j + 1, j, j - 1))
        m = len(rows)
        return system(rows, np.zeros(m), np.full(m, np.inf), np.zeros(p))

    raise ConfigurationError(f"unknown constraint {constraint!r}")


def _unit_row(p: int, k: int) -> np.ndarray:
    row = np.zeros(p)
    row[k] = 1.0
    return row


def _diff_row(p: int, plus: int, minus: int) -> np.ndarray:
    row = np.zeros(p)
    row[plus] = 1.0
    row[minus] = -1.0
    return row


def _second_diff_row(p: int, right: int, mid: int, left: int) -> np.ndarray:
    row = np.zeros(p)
    row[right] = 1.0
    row[mid] = -2.0
    row[left] = 1.0
    return row


def default_tolerance(zeta: np.ndarray) -> float:
    """Scaled feasibility tolerance 1e-9 * (1 + max|coef|)."""
    zeta = np.asarray(zeta, dtype=float)
    scale = np.max(np.abs(zeta)) if zeta.size else 0.0
    return 1e-9 * (1.0 + scale)


def membership_mask(system: LinearInequalitySystem, Z: np.ndarray, tol=None) -> np.ndarray:
    """Row-wise feasibility of a (m, p) stack of coefficient vectors."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if Z.shape[1] != system.n_coefficients:
        raise ValueError("coefficient length does not match the system")
    if system.n_rows == 0:
        return np.ones(Z.shape[0], dtype=bool)
    if tol is None:
        tol = 1e-9 * (1.0 + np.max(np.abs(Z), axis=1))
    tol = np.asarray(tol, dtype=float).reshape(-1, 1) * np.ones((Z.shape[0], 1))
    vals = Z @ system.matrix.T
    ok_low = vals >= system.lower[None, :] - tol
    ok_up = vals <= system.upper[None, :] + tol
    return np.all(ok_low & ok_up, axis=1)


def is_member(system: LinearInequalitySystem, zeta, tol: float | None = None) -> bool:
    """True iff every row satisfies lower - tol <= row . zeta <= upper + tol."""
    zeta = np.asarray(zeta, dtype=float)
    if tol is None:
        tol = default_tolerance(zeta)
    return bool(membership_mask(system, zeta[None, :], np.array([tol]))[0])


def _probe_axis(grid: KnotGrid, probes_per_dim: int | None) -> np.ndarray:
    if probes_per_dim is None:
        probes_per_dim = 10 * grid.subdivisions + 1
    if probes_per_dim < 2:
        raise ValueError("need at least 2 probes per dimension")
    return np.linspace(0.0, 1.0, probes_per_dim)


def check_function_shape(
    constraint: ShapeConstraint,
    grid: KnotGrid,
    kind: str,
    zeta,
    probes_per_dim: int | None = None,
    tol: float | None = None,
) -> bool:
    """Verify the functional shape property on a dense probe grid.

    This checks the reconstructed function directly (pointwise bounds,
    ordered differences, or discrete curvature), independently of `encode`.
    """
    _require_compatible(constraint, grid, kind)
    zeta = np.asarray(zeta, dtype=float)
    if zeta.shape != (grid.coefficient_count(kind),):
        raise ValueError("coefficient length does not match the model kind")
    if tol is None:
        tol = default_tolerance(zeta)
    if isinstance(constraint, Unconstrained):
        return True

    axis = _probe_axis(grid, probes_per_dim)
    if grid.dim == 1:
        values = design_matrix(grid, kind, axis[:, None]) @ zeta
        if isinstance(constraint, Bounded):
            return bool(np.all(values >= constraint.lower - tol) and np.all(values <= constraint.upper + tol))
        hats = design_matrix(grid, VALUE, axis[:, None])
        if isinstance(constraint, Monotone):
            # ordered function values, plus the slope function at the probes:
            # the slope is piecewise linear, so probing it (knots included)
            # is equivalent to monotonicity on the whole interval, even when
            # a dip is narrower than the probe spacing.
            slopes = hats @ zeta[1:]
            diffs = np.diff(values)
            if constraint.direction == INCREASING:
                return bool(np.all(diffs >= -tol) and np.all(slopes >= -tol))
            return bool(np.all(diffs <= tol) and np.all(slopes <= tol))
        if isinstance(constraint, Convex):
            # midpoint inequality plus the curvature function at the probes
            curvature = hats @ zeta[2:]
            return bool(np.all(np.diff(values, n=2) >= -tol) and np.all(curvature >= -tol))
        raise ConfigurationError(f"unsupported 1-D constraint {constraint!r}")

    pts = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    surface = (design_matrix(grid, kind, pts) @ zeta).reshape(axis.size, axis.size)
    if isinstance(constraint, Bounded):
        return bool(
            np.all(surface >= constraint.lower - tol) and np.all(surface <= constraint.upper + tol)
        )
    if isinstance(constraint, Isotonic):
        inc1, inc2 = constraint.increasing
        ok = True
        if inc1:
            ok = ok and bool(np.all(np.diff(surface, axis=0) >= -tol))
        if inc2:
            ok = ok and bool(np.all(np.diff(surface, axis=1) >= -tol))
        return ok
    if isinstance(constraint, ConvexAlongAxes):
        ok1 = bool(np.all(np.diff(surface, n=2, axis=0) >= -tol))
        ok2 = bool(np.all(np.diff(surface, n=2, axis=1) >= -tol))
        return ok1 and ok2
    raise ConfigurationError(f"unsupported 2-D constraint {constraint!r}")
