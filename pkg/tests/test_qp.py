import numpy as np
import pytest

from gpshape.basis import DERIVATIVE, VALUE, KnotGrid
from gpshape.constraints import (
    Bounded,
    LinearInequalitySystem,
    Monotone,
    encode,
    is_member,
)
from gpshape.exceptions import InfeasibleSystemError
from gpshape.kernels import Kernel
from gpshape.model import CoefficientPosterior, build_prior, condition, observation_matrix
from gpshape.qp import QpProblem, map_curve, solve_map, solve_qp


def box_system(p, lower, upper, witness=None):
    if witness is None:
        witness = np.clip(np.zeros(p), lower, upper)
    return LinearInequalitySystem(np.eye(p), np.full(p, lower), np.full(p, upper), witness)


def random_spd(rng, n, scale=1.0):
    A = rng.standard_normal((n, n))
    return scale * (A @ A.T + n * np.eye(n))


def test_projection_onto_orthant():
    post = CoefficientPosterior(np.array([-1.0, 2.0]), np.eye(2))
    system = box_system(2, 0.0, np.inf)
    sol = solve_map(post, system)
    np.testing.assert_allclose(sol.solution, [0.0, 2.0], atol=1e-12)


def test_feasible_target_returned_exactly(rng):
    cov = random_spd(rng, 5)
    target = np.abs(rng.standard_normal(5)) + 0.1
    post = CoefficientPosterior(target, cov)
    sol = solve_map(post, box_system(5, 0.0, np.inf))
    np.testing.assert_array_equal(sol.solution, target)
    assert sol.kkt_residual <= 1e-10


def test_matches_brute_force_lattice(rng):
    """4-dim box problem vs dense grid search on a 41^4 lattice."""
    cov = random_spd(rng, 4)
    target = rng.standard_normal(4) * 1.5
    system = box_system(4, 0.0, 1.0, witness=np.full(4, 0.5))
    sol = solve_qp(QpProblem(cov, target, system))

    axis = np.linspace(0.0, 1.0, 41)
    grid = np.stack(np.meshgrid(axis, axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 4)
    H = np.linalg.inv(cov)
    d = grid - target
    vals = np.einsum("ni,ij,nj->n", d, H, d)
    best = grid[np.argmin(vals)]
    assert np.max(np.abs(sol.solution - best)) <= 0.025 + 1e-9


@pytest.mark.parametrize("trial", range(20))
def test_kkt_conditions_on_random_problems(trial, rng):
    p = int(rng.integers(3, 8))
    cov = random_spd(rng, p)
    target = rng.standard_normal(p) * 2.0
    lo = rng.uniform(-0.5, 0.0, p)
    hi = rng.uniform(0.5, 1.0, p)
    system = LinearInequalitySystem(np.eye(p), lo, hi, 0.5 * (lo + hi))
    sol = solve_qp(QpProblem(cov, target, system))

    scaled = 1e-6 * (1.0 + np.max(np.abs(target)))
    assert sol.kkt_residual <= scaled
    assert is_member(system, sol.solution, tol=1e-8 * (1 + np.max(np.abs(sol.solution))))
    # multiplier signs: >= 0 on active lower rows, <= 0 on active upper rows
    vals = system.matrix @ sol.solution
    for j, lam in enumerate(sol.multipliers):
        if lam > 1e-10:
            assert vals[j] == pytest.approx(lo[j], abs=1e-7)
        elif lam < -1e-10:
            assert vals[j] == pytest.approx(hi[j], abs=1e-7)


def test_covariance_rescaling_leaves_solution_unchanged(rng):
    grid = KnotGrid(1, 10)
    kernel = Kernel("squared_exponential", 1.0, (0.3,))
    prior = build_prior(DERIVATIVE, grid, kernel)
    X = rng.uniform(0, 1, (25, 1))
    y = np.sin(2 * X[:, 0]) + 0.3 * rng.standard_normal(25)
    A = observation_matrix(DERIVATIVE, grid, X)
    post = condition(prior, A, y, 0.5)
    system = encode(Monotone(), grid, DERIVATIVE)

    base = solve_map(post, system).solution
    for c in (0.01, 100.0):
        scaled = CoefficientPosterior(post.mean, c * post.covariance)
        sol = solve_map(scaled, system).solution
        np.testing.assert_allclose(sol, base, atol=1e-7 * (1 + np.max(np.abs(base))))


def test_objective_never_increases(rng):
    grid = KnotGrid(1, 12)
    kernel = Kernel("squared_exponential", 1.0, (0.15,))
    prior = build_prior(DERIVATIVE, grid, kernel)
    X = rng.uniform(0, 1, (40, 1))
    y = np.where(X[:, 0] > 0.6, 2.0, 0.0) + 0.5 * rng.standard_normal(40)
    A = observation_matrix(DERIVATIVE, grid, X)
    post = condition(prior, A, y, 0.5)
    sol = solve_map(post, encode(Monotone(), grid, DERIVATIVE), keep_trace=True)
    trace = np.asarray(sol.objective_trace)
    assert trace.size >= 2
    assert np.all(np.diff(trace) <= 1e-10 * (1.0 + np.abs(trace[:-1])))


def test_bit_for_bit_determinism(rng):
    cov = random_spd(rng, 6)
    target = rng.standard_normal(6)
    system = box_system(6, -0.2, 0.4, witness=np.zeros(6))
    a = solve_qp(QpProblem(cov, target, system)).solution
    b = solve_qp(QpProblem(cov, target, system)).solution
    assert a.tobytes() == b.tobytes()


def test_infeasible_start_reports_row():
    post = CoefficientPosterior(np.zeros(3), np.eye(3))
    system = box_system(3, 0.0, 1.0, witness=np.full(3, 0.5))
    with pytest.raises(InfeasibleSystemError) as info:
        solve_map(post, system, start=np.array([0.5, -1.0, 0.5]))
    assert info.value.row == 1


def test_empty_system_returns_target(rng):
    target = rng.standard_normal(4)
    post = CoefficientPosterior(target, np.eye(4))
    system = LinearInequalitySystem(np.zeros((0, 4)), np.zeros(0), np.zeros(0), np.zeros(4))
    sol = solve_map(post, system)
    np.testing.assert_array_equal(sol.solution, target)


class TestMapCurve:
    def test_positivity_curve_everywhere_nonnegative(self, rng):
        grid = KnotGrid(1, 15)
        kernel = Kernel("squared_exponential", 1.0, (0.2,))
        prior = build_prior(VALUE, grid, kernel)
        X = rng.uniform(0, 1, (30, 1))
        y = 0.3 + 0.5 * np.sin(6 * X[:, 0]) + 0.5 * rng.standard_normal(30)
        A = observation_matrix(VALUE, grid, X)
        post = condition(prior, A, y, 0.5)
        system = encode(Bounded(0.0, np.inf), grid, VALUE)
        sol = solve_map(post, system)
        xs = np.linspace(0, 1, 1000)[:, None]
        assert np.all(map_curve(sol, VALUE, grid, xs) >= -1e-8)

    def test_feasible_case_equals_unconstrained_mean(self, rng):
        from gpshape.model import unconstrained_mean

        grid = KnotGrid(1, 10)
        kernel = Kernel("squared_exponential", 1.0, (0.4,))
        prior = build_prior(DERIVATIVE, grid, kernel)
        X = np.linspace(0.05, 0.95, 20)[:, None]
        y = 3.0 * X[:, 0]  # strongly increasing, noise-free data
        A = observation_matrix(DERIVATIVE, grid, X)
        post = condition(prior, A, y, 0.01)
        system = encode(Monotone(), grid, DERIVATIVE)
        assert is_member(system, post.mean)
        sol = solve_map(post, system)
        xs = rng.uniform(0, 1, (50, 1))
        np.testing.assert_allclose(
            map_curve(sol, DERIVATIVE, grid, xs),
            unconstrained_mean(post, DERIVATIVE, grid, xs),
            atol=1e-8,
        )

    def test_monotone_benchmark_curve_is_nondecreasing(self, rng):
        grid = KnotGrid(1, 50)
        kernel = Kernel("squared_exponential", 1.0, (0.25,))
        prior = build_prior(DERIVATIVE, grid, kernel)
        X = rng.uniform(0, 1, (30, 1))
        y = 0.32 * (10 * X[:, 0] + np.sin(10 * X[:, 0])) + rng.standard_normal(30)
        y -= y.mean()
        A = observation_matrix(DERIVATIVE, grid, X)
        post = condition(prior, A, y, 1.0)
        sol = solve_map(post, encode(Monotone(), grid, DERIVATIVE))
        curve = map_curve(sol, DERIVATIVE, grid, np.linspace(0, 1, 1001)[:, None])
        assert np.all(np.diff(curve) >= -1e-8)
