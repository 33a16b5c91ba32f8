import numpy as np
import pytest

from gpshape.basis import DERIVATIVE, SECOND_DERIVATIVE, VALUE, KnotGrid
from gpshape.constraints import (
    Bounded,
    Convex,
    ConvexAlongAxes,
    Isotonic,
    Monotone,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def feasible_vector(constraint, grid: KnotGrid, kind: str, rng) -> np.ndarray:
    """Strictly feasible coefficient vector for a constraint, by construction."""
    n = grid.subdivisions
    if isinstance(constraint, Bounded):
        lo, hi = constraint.lower, constraint.upper
        p = grid.coefficient_count(kind)
        if np.isfinite(lo) and np.isfinite(hi):
            margin = 0.05 * (hi - lo)
            return rng.uniform(lo + margin, hi - margin, p)
        if np.isfinite(lo):
            return lo + 0.01 + np.abs(rng.standard_normal(p))
        return hi - 0.01 - np.abs(rng.standard_normal(p))
    if isinstance(constraint, Monotone):
        slopes = 0.01 + np.abs(rng.standard_normal(n + 1))
        if constraint.direction == "decreasing":
            slopes = -slopes
        return np.concatenate([rng.standard_normal(1), slopes])
    if isinstance(constraint, Convex):
        curv = 0.01 + np.abs(rng.standard_normal(n + 1))
        return np.concatenate([rng.standard_normal(2), curv])
    if isinstance(constraint, Isotonic):
        inc1, inc2 = constraint.increasing
        if inc1 and inc2:
            # double cumulative sum of nonnegative increments is isotonic in both
            inc = 0.01 + np.abs(rng.standard_normal((n + 1, n + 1)))
            surf = np.cumsum(np.cumsum(inc, axis=0), axis=1) + rng.standard_normal()
        elif inc1:
            steps = 0.01 + np.abs(rng.standard_normal((n + 1, n + 1)))
            steps[0] = rng.standard_normal(n + 1)
            surf = np.cumsum(steps, axis=0)
        else:
            steps = 0.01 + np.abs(rng.standard_normal((n + 1, n + 1)))
            steps[:, 0] = rng.standard_normal(n + 1)
            surf = np.cumsum(steps, axis=1)
        return surf.reshape(-1)
    if isinstance(constraint, ConvexAlongAxes):
        # f_i + g_j + c*t_i*t_j with convex sequences f, g has nonnegative
        # second differences along both axes.
        def convex_seq():
            start = rng.standard_normal()
            slope = rng.standard_normal()
            curls = 0.01 + np.abs(rng.standard_normal(n + 1))
            slopes = slope + np.cumsum(curls)[: n + 1]
            return start + np.concatenate([[0.0], np.cumsum(slopes[:-1])])

        f, g = convex_seq(), convex_seq()
        t = grid.knots
        c = rng.standard_normal()
        surf = f[:, None] + g[None, :] + c * np.outer(t, t)
        return surf.reshape(-1)
    raise AssertionError(f"no feasible generator for {constraint!r}")


EQUIVALENCE_CASES_1D = [
    (Bounded(-0.7, 1.2), VALUE),
    (Bounded(0.0, np.inf), VALUE),
    (Monotone("increasing"), DERIVATIVE),
    (Monotone("decreasing"), DERIVATIVE),
    (Convex(), SECOND_DERIVATIVE),
]

EQUIVALENCE_CASES_2D = [
    (Bounded(-0.7, 1.2), VALUE),
    (Isotonic((True, True)), VALUE),
    (Isotonic((True, False)), VALUE),
    (Isotonic((False, True)), VALUE),
    (ConvexAlongAxes(), VALUE),
]
