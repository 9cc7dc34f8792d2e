from fractions import Fraction

import numpy as np
import pytest

from invopt.errors import SizeLimitError
from invopt.generators import ex1
from invopt.oracle import (bounding_box, brute_force_forward, certify_inverse,
                           enumerate_integer_points, vertex_enumeration)
from invopt.problem import RawProblem, standardize

from conftest import EX1_POINTS, exact_points


def test_bounding_box(p1):
    lo, hi = bounding_box(p1)
    np.testing.assert_allclose(lo, [44 / 29, 18 / 17], atol=1e-9)
    np.testing.assert_allclose(hi, [82 / 17, 64 / 11], atol=1e-9)


def test_exact_forward_value(p1):
    opt = brute_force_forward(p1, [Fraction(4, 3), Fraction(1)])
    assert opt.value == Fraction(20, 3)
    assert exact_points(opt.argmin) == [(2, 4)]
    ties = brute_force_forward(p1, [1, 1])
    assert ties.value == 6
    assert exact_points(ties.argmin) == [(2, 4), (3, 3), (4, 2)]
    assert exact_points(ties.points) == EX1_POINTS


def test_certify(p1, obs42):
    cert = certify_inverse(p1, obs42, [Fraction(4, 3), Fraction(1)])
    assert not cert.optimal and cert.gap == Fraction(2, 3)
    assert certify_inverse(p1, obs42, [1, 1]).optimal
    assert certify_inverse(p1, obs42, [1.0, 1.0]).optimal
    assert not certify_inverse(p1, obs42, [3.0, 1.0]).optimal


def test_mixed_problem_value():
    p = ex1(integer=False)
    raw = RawProblem.from_rows([r for r in zip(p.A_struct.tolist(), ["<="] * 4, p.b)],
                               integrality=[True, False])
    q = standardize(raw)
    # x1 integer, x2 continuous, cost (4/3, 1): the smallest x2 is 11/3, 7/3, 4/3
    # for x1 = 2, 3, 4
    opt = brute_force_forward(q, [4 / 3, 1])
    assert opt.value == pytest.approx(min(8 / 3 + 11 / 3, 4 + 7 / 3, 16 / 3 + 4 / 3))
    assert opt.value == pytest.approx(19 / 3)


def test_size_limit(p1):
    with pytest.raises(SizeLimitError):
        enumerate_integer_points(p1, box_limit=3)
    unbounded = standardize(RawProblem.from_rows([((1, -1), "<=", 0)], integrality=True))
    with pytest.raises(SizeLimitError):
        enumerate_integer_points(unbounded)


def test_empty_region():
    p = standardize(RawProblem.from_rows([((2,), "=", 1)], integrality=True))
    assert len(enumerate_integer_points(p)) == 0
    assert brute_force_forward(p, [1]).value is None


def test_vertex_count(p1):
    assert len(vertex_enumeration(p1)) == 4
