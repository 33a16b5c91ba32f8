"""Strictly convex QP for the posterior mode under linear inequality rows.

Solves  min_x 0.5 (x - target)^T C^{-1} (x - target)  subject to
lower <= M x <= upper, with C the (PD, possibly jitter-regularized)
posterior covariance.  A primal active-set method runs in whitened
coordinates v = L^{-1}(x - target), C = L L^T, where the objective is
0.5 ||v||^2 and each equality-constrained subproblem is a minimum-norm
solve with the active rows of M L — done through one QR factorization, so
steps and multipliers stay accurate even for nearly singular C.  Because
the objective recenters by the target, the minimizer is invariant under a
positive rescaling of C.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, qr, solve_triangular

from . import linalg
from .basis import KnotGrid, design_matrix
from .constraints import LinearInequalitySystem
from .exceptions import InfeasibleSystemError, IterationLimitError
from .model import CoefficientPosterior

__all__ = ["QpProblem", "QpSolution", "solve_qp", "solve_map", "map_curve"]

LOWER = 1
UPPER = -1


@dataclass(frozen=True)
class QpProblem:
    """Recentered quadratic objective (via its covariance) plus a system."""

    covariance: np.ndarray
    target: np.ndarray
    system: LinearInequalitySystem

    def __post_init__(self):
        cov = linalg.require_symmetric(np.asarray(self.covariance, dtype=float))
        target = np.atleast_1d(np.asarray(self.target, dtype=float))
        if cov.shape[0] != target.size or self.system.n_coefficients != target.size:
            raise ValueError("covariance, target, and system dimensions disagree")
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "target", target)


@dataclass
class QpSolution:
    """Minimizer, per-row multipliers, and solver diagnostics."""

    solution: np.ndarray
    multipliers: np.ndarray
    active_rows: tuple[tuple[int, int], ...]  # (row index, LOWER/UPPER)
    iterations: int
    kkt_residual: float
    objective_trace: list[float] = field(default_factory=list)


def solve_qp(
    problem: QpProblem,
    start: np.ndarray | None = None,
    max_iter: int | None = None,
    keep_trace: bool = False,
) -> QpSolution:
    """Primal active-set solve of a strictly convex, recentered QP.

    `start` must be feasible (defaults to the system's witness).  Blocking
    rows are activated at the lowest row index among equal step limits, the
    working set changes one row at a time, and all tie-breaks are
    deterministic, so identical problems give identical solutions.
    """
    system = problem.system
    target = problem.target
    p = target.size
    matrix, lower, upper = system.matrix, system.lower, system.upper
    m_rows = system.n_rows

    L, _ = linalg.jittered_cholesky(problem.covariance)
    whitened = matrix @ L if m_rows else np.zeros((0, p))  # rows of M L

    x = np.array(system.witness if start is None else start, dtype=float)
    if x.shape != (p,):
        raise ValueError("start point has the wrong length")
    feas_tol = 1e-9 * (1.0 + np.max(np.abs(x)) + np.max(np.abs(target)))
    if m_rows:
        vals = matrix @ x
        bad = np.flatnonzero((vals < lower - feas_tol) | (vals > upper + feas_tol))
        if bad.size:
            raise InfeasibleSystemError(
                f"start point violates row {bad[0]}", row=int(bad[0])
            )

    if max_iter is None:
        max_iter = 50 * (m_rows + p)

    trace: list[float] = []

    def kkt_residual(point, multipliers) -> float:
        grad = cho_solve((L, True), point - target)
        if m_rows:
            grad = grad - matrix.T @ multipliers
        return float(np.max(np.abs(grad))) if grad.size else 0.0

    def objective(point) -> float:
        half = solve_triangular(L, point - target, lower=True)
        return 0.5 * float(half @ half)

    if m_rows == 0:
        sol = target.copy()
        return QpSolution(
            sol, np.zeros(0), (), 0, kkt_residual(sol, np.zeros(0)),
            [objective(sol)] if keep_trace else [],
        )

    working: list[tuple[int, int]] = []
    in_working = np.zeros(m_rows, dtype=bool)
    banned_row = -1  # last-dropped row; not re-added until a real step occurs

    for iteration in range(1, max_iter + 1):
        if keep_trace:
            trace.append(objective(x))
        if working:
            rows = [j for j, _ in working]
            What_T = whitened[rows].T  # (p, |W|)
            Q, R = qr(What_T, mode="economic")
            rhs = matrix[rows] @ (x - target)
            w = solve_triangular(R.T, rhs, lower=True)
            v_eqp = Q @ w  # minimum-norm v with active rows held at their values
            nu = solve_triangular(R, w, lower=False)
            x_eqp = target + L @ v_eqp
        else:
            nu = np.zeros(0)
            x_eqp = target.copy()
        p_step = x_eqp - x

        scale = 1.0 + np.max(np.abs(x)) + np.max(np.abs(x_eqp))
        if np.max(np.abs(p_step)) <= 1e-9 * scale:
            # Stationary on the working set; check multiplier signs
            # (gradient = M^T nu with nu >= 0 on lower-active rows,
            #  nu <= 0 on upper-active rows).
            worst = None
            mscale = 1e-8 * (1.0 + (np.max(np.abs(nu)) if nu.size else 0.0))
            for idx, (j, side) in enumerate(working):
                violation = -nu[idx] if side == LOWER else nu[idx]
                if violation > mscale:
                    key = (-violation, j)
                    if worst is None or key < worst[0]:
                        worst = (key, idx)
            if worst is None:
                multipliers = np.zeros(m_rows)
                for idx, (j, _) in enumerate(working):
                    multipliers[j] = nu[idx]
                if keep_trace:
                    trace.append(objective(x))
                return QpSolution(
                    x, multipliers, tuple(working), iteration,
                    kkt_residual(x, multipliers), trace,
                )
            _, drop_idx = worst
            banned_row, _ = working.pop(drop_idx)
            in_working[banned_row] = False
            continue

        # Ratio test over inactive rows: largest alpha in (0, 1] keeping
        # every row inside its bounds; ties go to the lowest row index.
        Mx = matrix @ x
        Mp = matrix @ p_step
        alpha = 1.0
        block: tuple[int, int] | None = None
        dir_tol = 1e-13 * max(1.0, float(np.max(np.abs(Mp))))
        for j in range(m_rows):
            if in_working[j] or j == banned_row:
                continue
            move = Mp[j]
            if move > dir_tol and np.isfinite(upper[j]):
                limit = (upper[j] - Mx[j]) / move
                side = UPPER
            elif move < -dir_tol and np.isfinite(lower[j]):
                limit = (lower[j] - Mx[j]) / move
                side = LOWER
            else:
                continue
            limit = max(limit, 0.0)
            if limit < alpha - 1e-15:
                alpha = limit
                block = (j, side)
        if block is None:
            x = x_eqp
            banned_row = -1
        else:
            x = x + alpha * p_step
            working.append(block)
            in_working[block[0]] = True
            if alpha > 1e-12:
                banned_row = -1

    raise IterationLimitError(f"active-set loop exceeded {max_iter} iterations")


def solve_map(
    posterior: CoefficientPosterior,
    system: LinearInequalitySystem,
    start: np.ndarray | None = None,
    max_iter: int | None = None,
    keep_trace: bool = False,
) -> QpSolution:
    """Mode of the posterior coefficient law restricted to the system."""
    problem = QpProblem(posterior.covariance, posterior.mean, system)
    return solve_qp(problem, start=start, max_iter=max_iter, keep_trace=keep_trace)


def map_curve(solution: QpSolution | np.ndarray, kind: str, grid: KnotGrid, X) -> np.ndarray:
    """Evaluate the mode curve at points X."""
    coef = solution.solution if isinstance(solution, QpSolution) else np.asarray(solution, float)
    return design_matrix(grid, kind, X) @ coef
