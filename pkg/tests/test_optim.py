"""Scalar search, Nelder-Mead, grid search and the simplex LP solver."""
import itertools
import math

import numpy as np
import pytest

from loadquant import (
    LinearProgram,
    ScalarObjective,
    VectorObjective,
    grid_search,
    minimize_bounded_scalar,
    minimize_nelder_mead,
    solve_lp_simplex,
)
from loadquant.errors import (
    Infeasible,
    InvalidConfig,
    MaxEvaluationsExceeded,
    NonFiniteObjective,
    Unbounded,
)


def enumerate_vertices(c, a, b):
    """Exhaustive basic-feasible-solution oracle: best objective or None."""
    m, n = a.shape
    best = None
    for cols in itertools.combinations(range(n), m):
        sub = a[:, cols]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        x_b = np.linalg.solve(sub, b)
        if np.min(x_b) < -1e-9:
            continue
        x = np.zeros(n)
        x[list(cols)] = x_b
        val = float(c @ x)
        if best is None or val < best:
            best = val
    return best


class TestBoundedScalar:
    def test_quadratic_vertex(self):
        obj = ScalarObjective(lambda x: (x - 2.0) ** 2, 0.0, 5.0)
        res = minimize_bounded_scalar(obj, tol=1e-6)
        assert res.x == pytest.approx(2.0, abs=1e-6)

    def test_monotone_hits_boundary(self):
        obj = ScalarObjective(lambda x: x, 1.0, 3.0)
        res = minimize_bounded_scalar(obj, tol=1e-4)
        assert res.x == pytest.approx(1.0, abs=1e-4)

    def test_negative_sine_vs_grid_oracle(self):
        obj = ScalarObjective(lambda x: -math.sin(x), 0.0, math.pi)
        res = minimize_bounded_scalar(obj, tol=1e-5)
        grid = np.linspace(0.0, math.pi, 1_000_001)
        oracle = grid[np.argmin(-np.sin(grid))]
        assert res.x == pytest.approx(oracle, abs=2e-5)
        assert res.x == pytest.approx(math.pi / 2, abs=1e-5)

    def test_bracket_shrinks_monotonically(self):
        widths = []
        obj = ScalarObjective(lambda x: (x - 0.3) ** 2 + math.sin(5 * x) * 0.1, -2.0, 4.0)
        minimize_bounded_scalar(obj, tol=1e-8, callback=lambda a, b: widths.append(b - a))
        assert len(widths) > 10
        assert all(b < a for a, b in zip(widths, widths[1:]))

    def test_budget_exhaustion(self):
        obj = ScalarObjective(lambda x: (x - 1.0) ** 2, 0.0, 2.0)
        with pytest.raises(MaxEvaluationsExceeded):
            minimize_bounded_scalar(obj, tol=1e-300)

    def test_bad_tol(self):
        obj = ScalarObjective(lambda x: x * x, -1.0, 1.0)
        with pytest.raises(InvalidConfig):
            minimize_bounded_scalar(obj, tol=0.0)


class TestGridSearch:
    GRID = [round(0.92 + 0.01 * i, 2) for i in range(9)]

    def test_interior_minimum(self):
        obj = ScalarObjective(lambda lam: (lam - 0.95) ** 2, 0.0, 2.0)
        assert grid_search(obj, self.GRID).x == pytest.approx(0.95)

    def test_tie_takes_first(self):
        obj = ScalarObjective(lambda lam: 1.0, 0.0, 2.0)
        assert grid_search(obj, self.GRID).x == pytest.approx(0.92)

    def test_monotone_decreasing(self):
        obj = ScalarObjective(lambda lam: -lam, 0.0, 2.0)
        assert grid_search(obj, self.GRID).x == pytest.approx(1.00)


class TestNelderMead:
    def test_sphere(self):
        obj = VectorObjective(lambda v: float(v @ v), 2)
        res = minimize_nelder_mead(obj, [1.0, 1.0], tol=1e-8)
        assert np.allclose(res.x, [0.0, 0.0], atol=1e-4)

    def test_log_mode_positive_argmin(self):
        obj = VectorObjective(lambda v: (math.log(v[0]) - 1.0) ** 2, 1)
        res = minimize_nelder_mead(obj, [1.0], tol=1e-10, bound_mode="log")
        assert res.x[0] == pytest.approx(math.e, abs=1e-3)

    def test_rosenbrock(self):
        obj = VectorObjective(
            lambda v: (1.0 - v[0]) ** 2 + 100.0 * (v[1] - v[0] ** 2) ** 2, 2
        )
        res = minimize_nelder_mead(obj, [-1.2, 1.0], tol=1e-10)
        assert np.allclose(res.x, [1.0, 1.0], atol=1e-3)
        assert res.value == pytest.approx(0.0, abs=1e-6)

    def test_never_worse_than_start(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a = rng.normal(size=3)

            def f(v, a=a):
                return float(np.sum(np.abs(v - a) ** 1.3) + math.sin(v[0]) * 0.5)

            start = rng.normal(size=3)
            res = minimize_nelder_mead(VectorObjective(f, 3), start, tol=1e-6,
                                       max_iterations=7)
            assert res.value <= f(start) + 1e-12

    def test_clamp_mode_respects_bounds(self):
        obj = VectorObjective(lambda v: float(v[0] + v[1]), 2,
                              bounds=[(1.0, 3.0), (0.5, 2.0)])
        res = minimize_nelder_mead(obj, [2.0, 1.0], tol=1e-9, bound_mode="clamp")
        assert res.x[0] >= 1.0 - 1e-12 and res.x[1] >= 0.5 - 1e-12
        assert res.value == pytest.approx(1.5, abs=1e-6)

    def test_non_finite_objective(self):
        obj = VectorObjective(lambda v: float("nan"), 1)
        with pytest.raises(NonFiniteObjective):
            minimize_nelder_mead(obj, [1.0], tol=1e-6)


class TestSimplex:
    def test_single_equality(self):
        lp = LinearProgram([1.0], [[1.0]], [3.0])
        res = solve_lp_simplex(lp)
        assert res.x[0] == pytest.approx(3.0, abs=1e-12)
        assert res.objective == pytest.approx(3.0, abs=1e-12)

    def test_vertex_of_simplex(self):
        lp = LinearProgram([-1.0, 0.0], [[1.0, 1.0]], [1.0])
        res = solve_lp_simplex(lp)
        assert np.allclose(res.x, [1.0, 0.0], atol=1e-12)
        assert res.objective == pytest.approx(-1.0)

    def test_infeasible(self):
        # x1 + x2 = -1 with x >= 0
        lp = LinearProgram([0.0, 0.0], [[1.0, 1.0]], [-1.0])
        with pytest.raises(Infeasible):
            solve_lp_simplex(lp)

    def test_unbounded(self):
        lp = LinearProgram([-1.0, 0.0], [[0.0, 1.0]], [1.0])
        with pytest.raises(Unbounded):
            solve_lp_simplex(lp)

    def test_redundant_rows(self):
        lp = LinearProgram([1.0, 1.0], [[1.0, 1.0], [2.0, 2.0]], [1.0, 2.0])
        res = solve_lp_simplex(lp)
        assert res.objective == pytest.approx(1.0, abs=1e-9)

    def test_beale_cycling_example_terminates(self):
        # classic degenerate instance that cycles under naive pivoting
        a_ub = np.array([
            [0.25, -60.0, -1.0 / 25.0, 9.0],
            [0.5, -90.0, -1.0 / 50.0, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        b_ub = np.array([0.0, 0.0, 1.0])
        c = np.array([-0.75, 150.0, -0.02, 6.0])
        a_eq = np.hstack([a_ub, np.eye(3)])
        lp = LinearProgram(np.concatenate([c, np.zeros(3)]), a_eq, b_ub)
        res = solve_lp_simplex(lp, pivot_rule="bland")
        assert res.objective == pytest.approx(-0.05, abs=1e-9)

    def test_random_5var_3cons_vs_vertex_oracle(self):
        rng = np.random.default_rng(123)
        for _ in range(100):
            m, n = 3, 5
            a = rng.normal(size=(m, n))
            x0 = rng.uniform(0.0, 2.0, size=n)
            b = a @ x0
            c = rng.uniform(0.0, 2.0, size=n)  # nonnegative -> bounded
            lp = LinearProgram(c, a, b)
            res = solve_lp_simplex(lp)
            oracle = enumerate_vertices(c, a, b)
            assert oracle is not None
            assert res.objective == pytest.approx(oracle, abs=1e-8)
            np.testing.assert_allclose(a @ res.x, b, atol=1e-9)
            assert np.min(res.x) >= -1e-12

    def test_constraint_residuals_and_nonnegativity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            m = int(rng.integers(1, 5))
            n = int(rng.integers(m, 9))
            a = rng.normal(size=(m, n)) * rng.uniform(0.5, 20)
            b = a @ rng.uniform(0.0, 3.0, size=n)
            c = rng.uniform(0.0, 1.0, size=n)
            res = solve_lp_simplex(LinearProgram(c, a, b))
            np.testing.assert_allclose(a @ res.x, b, atol=1e-9 * max(1.0, np.abs(b).max()))
            assert np.min(res.x) >= -1e-12

    def test_shape_validation(self):
        with pytest.raises(InvalidConfig):
            LinearProgram([1.0, 2.0], [[1.0]], [1.0])
