import numpy as np
import pytest

from relay_integrity.simplex import feasible_point, solve_lp


class TestSolveLp:
    def test_basic_minimum(self):
        # min x + y  s.t. x + 2y >= 4, 3x + y >= 6  (as <= on negated rows)
        res = solve_lp(
            c=[1.0, 1.0],
            a_ub=[[-1.0, -2.0], [-3.0, -1.0]],
            b_ub=[-4.0, -6.0],
        )
        assert res.status == "optimal"
        assert res.objective == pytest.approx(2.8, abs=1e-9)
        assert np.allclose(res.x, [1.6, 1.2], atol=1e-9)

    def test_equality_system(self):
        # min 2x + 3y  s.t. x + y = 10
        res = solve_lp([2.0, 3.0], a_eq=[[1.0, 1.0]], b_eq=[10.0])
        assert res.status == "optimal"
        assert res.objective == pytest.approx(20.0)
        assert np.allclose(res.x, [10.0, 0.0])

    def test_infeasible(self):
        res = solve_lp([1.0], a_eq=[[1.0]], b_eq=[2.0], a_ub=[[1.0]], b_ub=[1.0])
        assert res.status == "infeasible"

    def test_unbounded(self):
        res = solve_lp([-1.0, 0.0], a_ub=[[0.0, 1.0]], b_ub=[1.0])
        assert res.status == "unbounded"

    def test_degenerate_vertex(self):
        # Multiple constraints meet at the optimum; Bland's rule must not cycle.
        res = solve_lp(
            c=[-1.0, -1.0],
            a_ub=[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            b_ub=[1.0, 1.0, 2.0],
        )
        assert res.status == "optimal"
        assert res.objective == pytest.approx(-2.0)

    def test_redundant_equalities(self):
        res = solve_lp([1.0, 0.0],
                       a_eq=[[1.0, 1.0], [2.0, 2.0]],
                       b_eq=[1.0, 2.0])
        assert res.status == "optimal"
        assert res.objective == pytest.approx(0.0)

    def test_negative_rhs_handled(self):
        # x - y = -3 with x, y >= 0
        res = solve_lp([1.0, 1.0], a_eq=[[1.0, -1.0]], b_eq=[-3.0])
        assert res.status == "optimal"
        assert np.allclose(res.x, [0.0, 3.0])

    def test_matches_enumeration_on_random_polytopes(self):
        rng = np.random.default_rng(42)
        for _ in range(30):
            # min c.x over the simplex {x >= 0, sum x = 1}: optimum is a vertex.
            k = int(rng.integers(2, 6))
            c = rng.normal(size=k)
            res = solve_lp(c, a_eq=[np.ones(k)], b_eq=[1.0])
            assert res.status == "optimal"
            assert res.objective == pytest.approx(c.min(), abs=1e-9)


class TestFeasiblePoint:
    def test_point_satisfies_constraints(self):
        a_eq = [[1.0, 1.0, 1.0]]
        b_eq = [1.0]
        a_ub = [[1.0, 0.0, 0.0]]
        b_ub = [0.25]
        x = feasible_point(a_eq, b_eq, a_ub, b_ub)
        assert x is not None
        assert x.sum() == pytest.approx(1.0, abs=1e-9)
        assert x[0] <= 0.25 + 1e-9
        assert np.all(x >= -1e-9)

    def test_empty_polytope(self):
        assert feasible_point([[1.0, 1.0]], [1.0], [[1.0, 1.0]], [0.5]) is None
