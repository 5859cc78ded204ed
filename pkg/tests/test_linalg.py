import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rpls.linalg import RankWarning, SingularSystemError, bareiss_echelon, float_nullspace, nullspace, solve
from rpls.scalar import RATIONAL, FloatField, QuadraticField, golden_ratio

small = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def matmul(A, g):
    return [sum((a * x for a, x in zip(row, g)), Fraction(0)) for row in A]


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)),
       st.data())
def test_solve_exact(A, data):
    n = len(A)
    x = data.draw(st.lists(small, min_size=n, max_size=n))
    b = [[v] for v in matmul(A, x)]
    try:
        sol = solve(RATIONAL, A, b)
    except SingularSystemError:
        _, piv = bareiss_echelon(RATIONAL, A)
        assert len(piv) < n
        return
    assert matmul(A, [r[0] for r in sol]) == [r[0] for r in b]


def test_solve_singular():
    with pytest.raises(SingularSystemError):
        solve(RATIONAL, [[1, 2], [2, 4]], [[1], [2]])


def test_solve_quadratic():
    b = golden_ratio()
    f = QuadraticField(5)
    A = [[b, f.one()], [f.one(), -b]]
    sol = solve(f, A, [[f.one()], [f.zero()]])
    x, y = sol[0][0], sol[1][0]
    assert b * x + y == 1 and x - b * y == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 5), st.data())
def test_nullspace_exact(rows, cols, data):
    M = data.draw(st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows))
    basis = nullspace(RATIONAL, M)
    _, piv = bareiss_echelon(RATIONAL, M)
    assert len(basis) == cols - len(piv)
    assert len(piv) == np.linalg.matrix_rank(np.array(M, dtype=float))
    for g in basis:
        assert all(v == 0 for v in matmul(M, g))
        assert next(v for v in g if v != 0) == 1


def test_nullspace_example():
    M = [[1, 1, 1, Fraction(5, 3), Fraction(5, 3)]]
    basis = nullspace(RATIONAL, [[Fraction(v) for v in M[0]]])
    assert len(basis) == 4


def test_float_nullspace():
    M = [[1.0, -1.0], [2.0, -2.0], [0.5, -0.5]]
    basis, sv, thr = float_nullspace(M)
    assert len(basis) == 1
    assert basis[0] == pytest.approx((1.0, 1.0))
    assert sv[-1] < thr


def test_float_nullspace_warns_near_threshold():
    M = [[1.0, 0.0], [0.0, 5e-9]]
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        float_nullspace(M, rel_tol=1e-9)
    assert any(issubclass(w.category, RankWarning) for w in rec)
    assert "candidate ranks" in str(rec[0].message)


def test_float_solve():
    sol = solve(FloatField(), [[2.0, 0.0], [0.0, 4.0]], [[1.0], [1.0]])
    assert sol == [[0.5], [0.25]]
