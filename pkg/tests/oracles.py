"""Independent reference computations used by the tests.

These deliberately avoid the package's algorithms: words are enumerated
explicitly, transfer operators are evaluated pointwise through preimages,
and closed forms are typed in by hand.
"""
from fractions import Fraction
from itertools import product

from rpls.scalar import golden_ratio


def word_sum_ki(sys, y, depth):
    """K_n(y) summed over every word of length 1..depth, one word at a time.

    A word w_1..w_t contributes its weight prod_s p_{w_s}/k at the interval
    holding the point reached after t-1 steps.
    """
    K = [0] * sys.n_intervals
    for t in range(1, depth + 1):
        for word in product(range(sys.n_maps), repeat=t):
            x, delta = y, 1
            for j in word[:-1]:
                i = sys.locate(x)
                delta = delta * sys.probs[j] / sys.slopes[i][j]
                x = sys.slopes[i][j] * x + sys.intercepts[i][j]
            i = sys.locate(x)
            j = word[-1]
            K[i] += delta * sys.probs[j] / sys.slopes[i][j]
    return K


def naive_closure(sys, seeds, limit=10_000):
    """Iterate all maps on a growing set until nothing new appears."""
    seen = set(seeds)
    todo = list(seeds)
    while todo:
        x = todo.pop()
        i = sys.locate(x)
        for j in range(sys.n_maps):
            y = sys.slopes[i][j] * x + sys.intercepts[i][j]
            if y not in seen:
                seen.add(y)
                todo.append(y)
                if len(seen) > limit:
                    raise RuntimeError("closure too large")
    return seen


def pointwise_transfer(sys, f, x):
    """(P_T f)(x) by summing over branch preimages; ``x`` must avoid all breakpoint images."""
    total = 0
    z = sys.partition
    for i in range(sys.n_intervals):
        for j in range(sys.n_maps):
            k, d = sys.slopes[i][j], sys.intercepts[i][j]
            pre = (x - d) / k
            if z[i] < pre < z[i + 1]:
                total += sys.probs[j] / abs(k) * f(pre)
    return total


def golden_beta_matrix(p):
    b = golden_ratio()
    c = b / (b * b - p * (1 - p))
    return [
        [c * p * p, -c * p * (1 - p)],
        [-c * p, c * (1 - p)],
        [c * p * (1 - p), -c * (1 - p) ** 2],
    ]


def golden_beta_density(p):
    """Pieces (left, right, value) of the normalized density of the golden random beta system."""
    b = golden_ratio()
    c = b * b / (1 + b * b)
    return [(0, b - 1, c * (1 - p) * b), (b - 1, 1, c), (1, b, c * p * b)]


def alpha_beta_density(p):
    """Four-indicator density of the random (1/beta, beta) system at the golden mean."""
    b = golden_ratio()
    c = b * b / (b * b + 1 + 2 * p)
    return [(0, b**-3, c * p * b), (0, b**-2, c * p), (0, 1 / b, c / b), (0, 1, c)]


LUROTH_DENSITY = [(Fraction(1, 3), Fraction(2, 3), Fraction(9, 8)), (Fraction(2, 3), Fraction(1), Fraction(15, 8))]


def lueroth_first_row(p):
    return [(p - 6) / 36, (1 - p) / 36, 0, p / 12, (1 - p) / 12]


def lueroth_matrix(p):
    """Full 6x5 fundamental matrix of the digit-2/3 Lueroth system, entered by hand."""
    F = Fraction
    return [
        [(p - 6) / 36, (1 - p) / 36, 0, p / 12, (1 - p) / 12],
        [(1 - 2 * p) / 6, (2 * p - 1) / 6, 0, 0, 0],
        [0, F(-1, 6), F(1, 6), 0, 0],
        [p / 18, (1 - p) / 18, F(1, 2), (p - 3) / 6, (1 - p) / 6],
        [0, 0, 0, (1 - 2 * p) / 2, (2 * p - 1) / 2],
        [p / 36, (1 - p) / 36, F(2, 3), p / 12, -(p + 5) / 12],
    ]
