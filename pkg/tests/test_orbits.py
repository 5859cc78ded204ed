from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_closure, word_sum_ki
from rpls.fundamental import kd_values, s_values
from rpls.gallery import luroth23, random_beta, to_float
from rpls.orbits import (
    FINITE,
    TRUNCATED,
    CapacityError,
    closure_to_csv,
    depth_for_bound,
    ka_kb,
    ki_exact,
    ki_truncated,
    orbit_closure,
    tail_bound,
    truncated_orbit,
    visit_weights,
)
from rpls.system import contraction_bound, critical_images

F = Fraction


def test_golden_closure_from_one(golden_beta, beta):
    c = orbit_closure(golden_beta, [1])
    assert c.status == FINITE
    assert set(c.points) == {0, 1 / beta, 1, beta}
    assert set(c.points) == naive_closure(golden_beta, [golden_beta.field.convert(1)])


def test_lueroth_closure(lueroth):
    c = orbit_closure(lueroth, [F(1, 3), F(2, 3), F(1)])
    assert c.finite
    assert set(c.points) <= {F(1, 3), F(1, 2), F(2, 3), F(1)}


def test_fixed_point_closure(golden_beta):
    c = orbit_closure(golden_beta, [0])
    assert list(c.points) == [0]


def test_truncated_closure():
    sys = random_beta(F(9, 5), F(1, 2))
    c = orbit_closure(sys, [1], cap=50)
    assert c.status == TRUNCATED
    assert not c.finite
    with pytest.raises(ValueError):
        ki_exact(sys, c, 1)


def test_float_closure_is_approximate(lueroth):
    c = orbit_closure(to_float(lueroth), [1 / 3, 2 / 3, 1.0])
    assert c.approximate
    assert len(c) <= 4


def test_edge_weights_bounded_by_rho(gallery_system):
    c = orbit_closure(gallery_system, critical_images(gallery_system).points())
    rho = contraction_bound(gallery_system)
    totals = {}
    for src, _j, _dst, w in c.edges:
        totals[src] = totals.get(src, 0) + abs(w)
    assert all(t <= rho for t in totals.values())


def test_ki_beta_fixed_point(golden_half, beta):
    c = orbit_closure(golden_half, [0])
    assert ki_exact(golden_half, c, 0).values == (1 / (beta - 1), 0, 0)


def test_ki_golden_closed_form(golden_beta, beta):
    p = F(1, 3)
    c = orbit_closure(golden_beta, [1])
    assert ki_exact(golden_beta, c, 1)[2] == p * beta**2 / (beta**2 - p * (1 - p))


def test_ki_lueroth_closed_forms(lueroth):
    c = orbit_closure(lueroth, [F(1, 3), F(2, 3), F(1)])
    assert ki_exact(lueroth, c, 1)[5] == 1
    assert ki_exact(lueroth, c, F(1, 3))[0] == F(-1, 6)
    assert ki_exact(lueroth, c, F(1, 3))[5] == F(-1, 6)
    assert ki_exact(lueroth, c, F(2, 3))[3] == F(-1, 3)


def test_ki_matches_word_enumeration(lueroth):
    rho = contraction_bound(lueroth)
    seeds = [F(1, 3), F(2, 3), F(1), F(1, 2)]
    c = orbit_closure(lueroth, seeds)
    for y in seeds:
        exact = ki_exact(lueroth, c, y)
        brute = word_sum_ki(lueroth, y, 10)
        for n in range(lueroth.n_intervals):
            assert abs(exact[n] - brute[n]) <= tail_bound(rho, 10)


def test_truncated_agrees_with_exact(lueroth):
    rho = contraction_bound(lueroth)
    c = orbit_closure(lueroth, [F(j, 60) for j in range(20, 61)])
    for y in c.points:
        exact = ki_exact(lueroth, c, y)
        trunc = ki_truncated(lueroth, y, 30)
        assert trunc.error_bound == tail_bound(rho, 30)
        assert all(abs(a - b) <= trunc.error_bound for a, b in zip(exact, trunc))


def test_truncated_matches_words_exactly(golden_beta):
    # same finite sum computed two ways
    for y in (1, golden_beta.partition[1], golden_beta.field.convert(F(1, 2))):
        assert list(ki_truncated(golden_beta, y, 8).values) == word_sum_ki(golden_beta, golden_beta.field.convert(y), 8)


def test_truncated_golden_fixed_point(golden_half, beta):
    k = ki_truncated(golden_half, 0, 40)
    assert abs(float(k[0]) - float(1 / (beta - 1))) <= float(k.error_bound)


def test_depth_zero(lueroth):
    k = ki_truncated(lueroth, 1, 0)
    rho = contraction_bound(lueroth)
    assert all(v == 0 for v in k)
    assert k.error_bound == rho / (1 - rho)


def test_capacity_error_exact():
    sys = random_beta(F(9, 5), F(1, 2))
    with pytest.raises(CapacityError):
        truncated_orbit(sys, 1, depth=60, cap=20)


def test_float_truncated_coarsens():
    sys = to_float(random_beta(F(9, 5), F(1, 2)))
    o = truncated_orbit(sys, 1.0, depth=40, cap=20)
    assert o.coarsened
    assert o.max_support <= 20
    assert o.merge_radius >= 1e-10


def test_visit_weights_fixed_point(golden_half, beta):
    c = orbit_closure(golden_half, [0])
    w = visit_weights(golden_half, c, 0)
    assert w.w == {0: beta / (beta - 1)}


def test_visit_weights_consistent_with_ki(gallery_system):
    c = orbit_closure(gallery_system, critical_images(gallery_system).points())
    S = s_values(gallery_system)
    for y in c.points:
        k = ki_exact(gallery_system, c, y)
        w = visit_weights(gallery_system, c, y)
        for n in range(gallery_system.n_intervals):
            total = sum((v for z, v in w.w.items() if gallery_system.locate(z) == n), 0)
            assert k[n] == S[n] * total


def test_ka_kb_identity(gallery_system):
    c = orbit_closure(gallery_system, critical_images(gallery_system).points())
    for y in c.points:
        k = ki_exact(gallery_system, c, y)
        for i in range(1, gallery_system.n_intervals):
            a, b = ka_kb(gallery_system, k, i)
            assert a + b == 1 + sum(k.values)


def test_ka_kb_lueroth(lueroth):
    c = orbit_closure(lueroth, [F(1)])
    k = ki_exact(lueroth, c, 1)
    # S_6 = p/2 + (1-p)/2 = 1/2 and K_6(1) = 1 is the only nonzero entry
    assert ka_kb(lueroth, k, 3) == (0, 2)
    with pytest.raises(ValueError):
        ka_kb(lueroth, k, 6)


def test_lemma_identities(gallery_system):
    c = orbit_closure(gallery_system, critical_images(gallery_system).points())
    K, D = kd_values(gallery_system)
    for y in c.points:
        k = ki_exact(gallery_system, c, y)
        assert sum(K[n] * k[n] for n in range(len(K))) == 1
        assert -sum(D[n] * k[n] for n in range(len(D))) == y


@settings(max_examples=25, deadline=None)
@given(st.fractions(min_value=F(1, 3), max_value=1, max_denominator=90))
def test_lemma_identities_rational_seeds(y):
    sys = luroth23(F(2, 5))
    c = orbit_closure(sys, [y])
    assert c.finite
    K, D = kd_values(sys)
    k = ki_exact(sys, c, y)
    assert sum(K[n] * k[n] for n in range(6)) == 1
    assert -sum(D[n] * k[n] for n in range(6)) == y


def test_closure_csv(golden_beta):
    c = orbit_closure(golden_beta, [1])
    text = closure_to_csv(c)
    lines = text.strip().split("\n")
    assert lines[0] == "point,map,target,weight"
    assert len(lines) == 1 + len(c.edges)


def test_depth_for_bound():
    d = depth_for_bound(F(1, 2), 1e-12)
    assert tail_bound(0.5, d) < 1e-12 <= tail_bound(0.5, d - 1)
