"""Thin deterministic dense-matrix layer: jittered Cholesky, SPD solves, quadratic forms.

Every inverse in the package is applied through these factorizations; no
explicit matrix inverse is ever formed.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .exceptions import ConditioningError

__all__ = [
    "symmetrize",
    "require_symmetric",
    "jittered_cholesky",
    "solve_spd",
    "quad_form",
]

# Jitter policy: first try eps = 0, then eps = JITTER_SCALE * trace/n doubled
# at most MAX_JITTER_TRIES times.
JITTER_SCALE = 1e-10
MAX_JITTER_TRIES = 10


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def require_symmetric(a: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Return `a` unchanged after checking max|A - A^T| <= rtol * max|A|."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(np.max(np.abs(a)), 1.0)
    skew = np.max(np.abs(a - a.T)) if a.size else 0.0
    if skew > rtol * scale:
        raise ValueError(f"matrix is not symmetric: max|A - A^T| = {skew:.3e}")
    return a


def jittered_cholesky(a: np.ndarray, base: float | None = None) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of a + eps*I; returns (L, eps).

    eps = 0 is attempted first.  On failure eps starts at
    ``base`` (default JITTER_SCALE * trace(a)/n) and doubles, at most
    MAX_JITTER_TRIES attempts, before raising ConditioningError.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0)), 0.0
    try:
        return cholesky(a, lower=True), 0.0
    except np.linalg.LinAlgError:
        pass
    if base is None:
        tr = float(np.trace(a))
        base = JITTER_SCALE * (tr / n if tr > 0 else 1.0)
    eps = base
    for _ in range(MAX_JITTER_TRIES):
        try:
            return cholesky(a + eps * np.eye(n), lower=True), eps
        except np.linalg.LinAlgError:
            eps *= 2.0
    raise ConditioningError(
        f"Cholesky failed for {n}x{n} matrix even with jitter {eps / 2.0:.3e}"
    )


def solve_spd(a: np.ndarray, b: np.ndarray, base: float | None = None) -> np.ndarray:
    """Solve (a + eps*I) x = b with eps from the jitter policy."""
    L, _ = jittered_cholesky(a, base=base)
    return cho_solve((L, True), np.asarray(b, dtype=float))

def quad_form(a: np.ndarray, v: np.ndarray, base: float | None = None) -> float:
    """v^T (a + eps*I)^{-1} v via a triangular solve."""
    L, _ = jittered_cholesky(a, base=base)
    half = solve_triangular(L, np.asarray(v, dtype=float), lower=True)
    return float(half @ half)
