"""Ready-made systems: random beta, random (alpha, beta), random Lueroth 2-3, single maps."""
from __future__ import annotations

from fractions import Fraction

from .scalar import FloatField, field_for, golden_ratio, parse_scalar
from .system import LEFT, RIGHT, RandomSystem

__all__ = ["gallery", "GALLERY", "random_beta", "random_alpha_beta", "luroth23", "single_map", "parse_param"]


def parse_param(text, beta=None):
    """Parse a parameter literal: ``"golden"``, ``"1/beta"``, ``"1/2"``, ``"1.8"``, ``"1/2+1/2*sqrt(5)"``."""
    if not isinstance(text, str):
        return text
    t = text.strip().lower()
    if t in ("golden", "phi"):
        return golden_ratio()
    if t.replace(" ", "") == "1/beta":
        if beta is None:
            raise ValueError("'1/beta' needs beta")
        return 1 / beta
    return parse_scalar(text)


def _field(*values):
    return field_for(*values)


def random_beta(beta, p, *, strict: bool = True) -> RandomSystem:
    """Random mix of the lazy (prob ``p``) and greedy (prob ``1-p``) beta-transformations.

    Lives on ``[0, 1/(beta-1)]`` with ``z_1 = 1/beta`` and ``z_2 = 1/(beta(beta-1))``,
    both owned by the middle interval.
    """
    beta, p = parse_param(beta), parse_param(p)
    f = _field(beta, p)
    beta, p = f.convert(beta), f.convert(p)
    if strict:
        if not (f.cmp(beta, 1) > 0 and f.cmp(beta, 2) < 0):
            raise ValueError("random_beta needs 1 < beta < 2")
        if not (f.sign(p) > 0 and f.cmp(p, 1) < 0):
            raise ValueError("p must lie in (0, 1)")
    one, zero = f.one(), f.zero()
    B = one / (beta - 1)
    z = (zero, one / beta, one / (beta * (beta - 1)), B)
    slopes = ((beta, beta),) * 3
    intercepts = ((zero, zero), (zero, -one), (-one, -one))
    return RandomSystem(f, z, slopes, intercepts, (p, 1 - p), (RIGHT, LEFT), name="random_beta")


def alpha_beta_p_bound(alpha, beta):
    """Largest admissible lazy-map probability for the random (alpha, beta) system (exclusive)."""
    return alpha * (beta - 1) / (beta - alpha)


def random_alpha_beta(alpha, beta, p, *, strict: bool = True) -> RandomSystem:
    """Random mix of the (alpha, beta)-transformation (prob ``p``) and the greedy beta map.

    The extension interval ``(1, 1/(beta-1)]`` carrying ``x -> beta*x - 1`` for
    both maps is attached so that both endpoints are mapped to endpoints.
    """
    beta = parse_param(beta)
    alpha = parse_param(alpha, beta)
    p = parse_param(p)
    f = _field(alpha, beta, p)
    alpha, beta, p = f.convert(alpha), f.convert(beta), f.convert(p)
    if strict:
        if not (f.cmp(beta, 1) > 0 and f.cmp(beta, 2) < 0):
            raise ValueError("random_alpha_beta needs 1 < beta < 2")
        if not (f.sign(alpha) > 0 and f.cmp(alpha, 1) < 0):
            raise ValueError("random_alpha_beta needs 0 < alpha < 1")
        if not (f.sign(p) > 0 and f.cmp(p, alpha_beta_p_bound(alpha, beta)) < 0):
            raise ValueError("random_alpha_beta needs 0 < p < alpha(beta-1)/(beta-alpha)")
    one, zero = f.one(), f.zero()
    z = (zero, one / beta, one, one / (beta - 1))
    slopes = ((beta, beta), (alpha, beta), (beta, beta))
    intercepts = ((zero, zero), (-alpha / beta, -one), (-one, -one))
    return RandomSystem(f, z, slopes, intercepts, (p, 1 - p), (RIGHT, LEFT), name="random_alpha_beta")


def luroth23(p) -> RandomSystem:
    """Random Lueroth system with digits 2 and 3 on ``[1/3, 1]``.

    Map 0 uses the Lueroth branch on I2, I3, I5, I6 and the alternating branch
    on I1, I4; map 1 uses the alternating branch on I1, I2, I4, I5 and the
    Lueroth branch on I3, I6.
    """
    p = parse_param(p)
    f = _field(p)
    p = f.convert(p)
    if not (f.sign(p) > 0 and f.cmp(p, 1) < 0):
        raise ValueError("p must lie in (0, 1)")
    F = Fraction
    z = (F(1, 3), F(7, 18), F(4, 9), F(1, 2), F(2, 3), F(5, 6), F(1))
    lur3, alt3 = (6, -2), (-6, 3)  # digit 3 branches on (1/3, 1/2]
    lur2, alt2 = (2, -1), (-2, 2)  # digit 2 branches on (1/2, 1]
    table = [
        (alt3, alt3),
        (lur3, alt3),
        (lur3, lur3),
        (alt2, alt2),
        (lur2, alt2),
        (lur2, lur2),
    ]
    slopes = tuple((m0[0], m1[0]) for m0, m1 in table)
    intercepts = tuple((m0[1], m1[1]) for m0, m1 in table)
    return RandomSystem(f, z, slopes, intercepts, (p, 1 - p), (LEFT,) * 5, name="luroth23")


_SINGLE = {
    "doubling": ((0, Fraction(1, 2), 1), ((2,), (2,)), ((0,), (-1,))),
    "tent": ((0, Fraction(1, 2), 1), ((2,), (-2,)), ((0,), (2,))),
    "skewed": ((0, Fraction(1, 3), 1), ((3,), (Fraction(3, 2),)), ((0,), (Fraction(-1, 2),))),
    "three_branch": (
        (0, Fraction(1, 4), Fraction(1, 2), 1),
        ((4,), (-4,), (2,)),
        ((0,), (2,), (-1,)),
    ),
}


def single_map(map="doubling", partition=None, slopes=None, intercepts=None, flags=None) -> RandomSystem:
    """A deterministic piecewise-linear map wrapped as a one-map random system."""
    if partition is None:
        try:
            partition, slopes, intercepts = _SINGLE[map]
        except KeyError:
            raise ValueError(f"unknown single map {map!r}; choose from {sorted(_SINGLE)}") from None
    values = [parse_param(x) for x in partition]
    slopes = [[parse_param(k) for k in row] for row in slopes]
    intercepts = [[parse_param(d) for d in row] for row in intercepts]
    f = _field(*values, *(k for r in slopes for k in r), *(d for r in intercepts for d in r))
    return RandomSystem(f, values, slopes, intercepts, (1,), flags, name=f"single_map:{map}")


GALLERY = {
    "random_beta": random_beta,
    "random_alpha_beta": random_alpha_beta,
    "luroth23": luroth23,
    "single_map": single_map,
}


def gallery(name: str, **params) -> RandomSystem:
    """Build a gallery system by name; parameters may be exact literals."""
    try:
        builder = GALLERY[name]
    except KeyError:
        raise ValueError(f"unknown example {name!r}; choose from {sorted(GALLERY)}") from None
    return builder(**params)


def to_float(sys: RandomSystem, eps: float = 1e-12) -> RandomSystem:
    return sys.converted(FloatField(eps))

