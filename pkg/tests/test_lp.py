from fractions import Fraction

import numpy as np
import pytest

from invopt.errors import SchemaError
from invopt.generators import ex1
from invopt.lp import (INFEASIBLE, OPTIMAL, UNBOUNDED, LpModel, LpSolution, check_certificate,
                       primal_violation, solve_lp)
from invopt.oracle import lp_min_by_vertices, vertex_enumeration
from invopt.problem import forward_model

from conftest import K, L, M, N, SCIPY_STATUS, random_lp, scipy_reference


def test_ex1_relaxation_value():
    p = ex1(integer=False)
    sol = solve_lp(forward_model(p, [3, 1]))
    assert sol.status == OPTIMAL
    # vertex K minimizes 3 x1 + x2 over the relaxation
    assert sol.objective == pytest.approx(257 / 29, abs=1e-9)
    sol = solve_lp(forward_model(p, [4 / 3, 1]))
    assert sol.objective == pytest.approx(19 / 3, abs=1e-9)
    rep = check_certificate(forward_model(p, [4 / 3, 1]), sol)
    assert rep.max_residual() <= 1e-9


def test_vertex_enumeration_matches_labels():
    v = vertex_enumeration(ex1())
    expect = sorted([tuple(map(float, w)) for w in (K, M, N, L)])
    np.testing.assert_allclose(v, expect, atol=1e-12)


def test_random_costs_against_vertices():
    p = ex1()
    rng = np.random.default_rng(1)
    for _ in range(20):
        c = rng.normal(size=2)
        sol = solve_lp(forward_model(p, c))
        assert sol.objective == pytest.approx(lp_min_by_vertices(p, c), abs=1e-9)


def test_engine_against_highs_and_certificate():
    rng = np.random.default_rng(2024)
    seen = set()
    for _ in range(500):
        model = random_lp(rng)
        sol = solve_lp(model)
        ref = scipy_reference(model)
        assert sol.status == SCIPY_STATUS[ref.status]
        seen.add(sol.status)
        if sol.is_optimal:
            assert sol.objective == pytest.approx(ref.fun, abs=1e-6 * (1 + abs(ref.fun)))
            assert check_certificate(model, sol).max_residual() <= 1e-6
    assert seen == {OPTIMAL, INFEASIBLE, UNBOUNDED}


def test_perturbed_certificate_is_flagged():
    p = ex1(integer=False)
    model = forward_model(p, [3, 1])
    sol = solve_lp(model)
    bad_y = sol.y.copy()
    bad_y[0] += 0.1
    rep = check_certificate(model, LpSolution(OPTIMAL, sol.x, bad_y, sol.s, sol.objective))
    assert rep.dual_residual > 1e-3 or rep.duality_gap > 1e-3
    bad_x = sol.x.copy()
    bad_x[0] += 0.5
    assert primal_violation(model, bad_x) > 1e-3


def test_dual_signs_for_senses():
    # min x  s.t.  x >= 2  -> y = 1 ;  min -x s.t. x <= 3 -> y = -1
    s1 = solve_lp(LpModel([1.0], [[1.0]], (">=",), [2.0]))
    s2 = solve_lp(LpModel([-1.0], [[1.0]], ("<=",), [3.0]))
    assert s1.y[0] == pytest.approx(1.0) and s2.y[0] == pytest.approx(-1.0)
    assert s1.objective == pytest.approx(2.0) and s2.objective == pytest.approx(-3.0)


def test_free_variable_and_equality():
    m = LpModel([1.0, 1.0], [[1.0, -1.0]], ("=",), [-3.0], lb=[-np.inf, 0.0])
    sol = solve_lp(m)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-3.0)


def test_degenerate_cycling_example_terminates():
    # classic Beale example; cycles under pure Dantzig without anti-cycling
    c = [-0.75, 150, -0.02, 6]
    A = [[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]]
    sol = solve_lp(LpModel(c, A, ("<=",) * 3, [0, 0, 1]))
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-0.05)


def test_redundant_rows_and_no_rows():
    m = LpModel([1.0, 2.0], [[1, 1], [2, 2]], ("=", "="), [1, 2])
    sol = solve_lp(m)
    assert sol.objective == pytest.approx(1.0)
    assert check_certificate(m, sol).max_residual() < 1e-9
    assert solve_lp(LpModel([1.0], np.zeros((0, 1)), (), [])).objective == 0.0
    assert solve_lp(LpModel([-1.0], np.zeros((0, 1)), (), [])).status == UNBOUNDED


def test_inconsistent_bounds_infeasible():
    assert solve_lp(LpModel([1.0], [[1.0]], ("<=",), [5], lb=[3], ub=[2])).status == INFEASIBLE


def test_model_validation():
    with pytest.raises(SchemaError):
        LpModel([1, 2], [[1, 2, 3]], ("<=",), [1])
    with pytest.raises(SchemaError):
        LpModel([1], [[1]], ("<",), [1])


def test_from_arrays_and_add_rows():
    m = LpModel.from_arrays([1, 1], A_ub=[[-1, -1]], b_ub=[-2], A_eq=[[1, -1]], b_eq=[0])
    assert m.senses == ("<=", "=")
    assert solve_lp(m).objective == pytest.approx(2.0)
    m2 = m.add_rows([[1, 0]], (">=",), [3])
    assert solve_lp(m2).objective == pytest.approx(6.0)


def test_fraction_vertex_values():
    # under (4/3, 1) the whole edge KM is optimal
    c = (Fraction(4, 3), Fraction(1))
    zk = c[0] * K[0] + c[1] * K[1]
    zm = c[0] * M[0] + c[1] * M[1]
    assert zk == zm == Fraction(19, 3)
    assert 3 * K[0] + K[1] == Fraction(257, 29)
