from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rpls.stepfunc import StepFunction, common_grid

F = Fraction
A, B = F(0), F(1)

points = st.fractions(min_value=0, max_value=1, max_denominator=24)
values = st.fractions(min_value=-4, max_value=4, max_denominator=10)
pieces = st.lists(st.tuples(points, points, values), max_size=8).map(
    lambda ps: [(min(a, b), max(a, b), v) for a, b, v in ps]
)
steps = pieces.map(lambda ps: StepFunction.from_pieces(A, B, ps))


def brute_value(ps, x):
    return sum((v for a, b, v in ps if a < x < b), F(0))


@settings(max_examples=80, deadline=None)
@given(pieces, st.lists(points, min_size=1, max_size=10))
def test_from_pieces_matches_pointwise_sum(ps, xs):
    f = StepFunction.from_pieces(A, B, ps)
    breaks = set(f.breaks) | {a for a, _, _ in ps} | {b for _, b, _ in ps}
    for x in xs:
        if x in breaks or not A < x < B:
            continue
        assert f(x) == brute_value(ps, x)


@given(steps)
def test_canonical(f):
    assert all(a < b for a, b in zip(f.breaks, f.breaks[1:]))
    assert all(u != v for u, v in zip(f.values, f.values[1:]))
    assert f.domain == (A, B)


@given(steps, steps)
def test_add_sub(f, g):
    assert (f + g) - g == f
    assert f + g == g + f
    assert (f - f).values == (0,)


@given(steps, values)
def test_scale_and_integral(f, c):
    assert (f * c).integral() == c * f.integral()
    assert (f + f).integral() == 2 * f.integral()


@given(steps, points, points)
def test_integral_over_splits(f, a, b):
    a, b = min(a, b), max(a, b)
    assert f.integral_over(A, a) + f.integral_over(a, b) + f.integral_over(b, B) == f.integral()


@given(steps)
def test_norms(f):
    assert f.l1_norm() >= abs(f.integral())
    assert f.sup_norm() >= 0
    if f.values != (0,):
        assert f.l1_norm() <= f.sup_norm() * (B - A)


def test_equality_is_almost_everywhere():
    f = StepFunction.from_pieces(A, B, [(0, F(1, 2), 1), (F(1, 2), 1, 1)])
    assert f == StepFunction.constant(A, B, 1)
    assert f.breaks == (0, 1)


def test_evaluation_and_sampling():
    f = StepFunction.from_pieces(A, B, [(0, F(1, 2), 2)])
    assert f(F(1, 4)) == 2
    assert f(F(1, 2)) == 0
    assert f(B) == 0
    with pytest.raises(ValueError):
        f(F(2))
    s = f.sample(5)
    assert s[0] == (0.0, 2.0) and s[-1] == (1.0, 0.0)


def test_cleanup_merges_slivers():
    eps = 1e-10
    f = StepFunction.from_pieces(0.0, 1.0, [(0.0, 0.5, 1.0), (0.5, 0.5 + 1e-12, 3.0), (0.5 + 1e-12, 1.0, 2.0)])
    g = f.cleanup(eps)
    assert len(g) == 2
    assert g.values == (1.0, 2.0)


def test_domain_mismatch():
    with pytest.raises(ValueError):
        StepFunction.constant(0, 1, 1) + StepFunction.constant(0, 2, 1)


def test_common_grid():
    f = StepFunction.from_pieces(A, B, [(0, F(1, 3), 1)])
    g = StepFunction.from_pieces(A, B, [(F(1, 2), 1, 1)])
    assert common_grid([f, g]) == [0, F(1, 3), F(1, 2), 1]
    assert f.refine_vector(common_grid([f, g])) == [1, 0, 0]
