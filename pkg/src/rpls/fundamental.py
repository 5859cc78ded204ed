"""The fundamental matrix of a random system and the null space that parametrizes invariant functions.

Indices are 0-based: row ``n`` is interval ``I_{n+1}`` and column ``i`` is the
interior partition point ``z_{i+1}``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .linalg import bareiss_echelon, float_nullspace, nullspace
from .orbits import (
    DEFAULT_CAP,
    DEFAULT_DEPTH,
    CapacityError,
    KiVector,
    VisitWeights,
    ka_kb,
    orbit_closure,
    truncated_orbit,
)
from .scalar import FloatField
from .system import RandomSystem, contraction_bound, critical_images

__all__ = [
    "EXACT",
    "TRUNCATED",
    "UnsupportedConfigurationError",
    "SelfCheckError",
    "ExactProvider",
    "TruncatedProvider",
    "FundamentalMatrix",
    "KernelBasis",
    "s_values",
    "kd_values",
    "build_matrix",
    "kernel",
    "self_check",
    "identity_check",
    "matrix_to_csv",
    "matrix_to_json",
]

EXACT = "exact"
TRUNCATED = "truncated"
TAU_RANK = 1e-9


class UnsupportedConfigurationError(ValueError):
    """Some ``S_n`` vanishes, so ``K_n`` and ``D_n`` are undefined."""


class SelfCheckError(AssertionError):
    """An identity that must hold exactly failed; points to a bug upstream."""


def s_values(sys: RandomSystem) -> list:
    """Average inverse slopes ``S_n = sum_j p_j / k_{n,j}``."""
    f = sys.field
    return [sum((sys.weight(n, j) for j in range(sys.n_maps)), f.zero()) for n in range(sys.n_intervals)]


def kd_values(sys: RandomSystem):
    """``(K, D)`` with ``K_n = 1/S_n - 1`` and ``D_n = (1/S_n) sum_j (p_j/k_{n,j}) d_{n,j}``."""
    f = sys.field
    S = s_values(sys)
    zero_at = [n + 1 for n, s in enumerate(S) if f.is_zero(s)]
    if zero_at:
        raise UnsupportedConfigurationError(f"S_n = 0 for n in {zero_at}")
    K = [1 / s - 1 for s in S]
    D = [
        sum((sys.weight(n, j) * sys.intercepts[n][j] for j in range(sys.n_maps)), f.zero()) / S[n]
        for n in range(sys.n_intervals)
    ]
    return K, D


def _critical_points(sys: RandomSystem) -> list:
    ci = critical_images(sys)
    return ci.points()


class ExactProvider:
    """Exact ``K_n(y)`` and visit weights on the orbit closure of the critical images.

    Raises :class:`CapacityError` when the closure does not finish within ``cap``.
    """

    mode = EXACT

    def __init__(self, sys: RandomSystem, extra_seeds=(), cap: int = DEFAULT_CAP):
        if not sys.field.exact:
            raise ValueError("exact mode needs an exact scalar backend")
        self.system = sys
        self.cap = cap
        self.closure = orbit_closure(sys, _critical_points(sys) + list(extra_seeds), cap)
        if not self.closure.finite:
            raise CapacityError(f"orbit closure exceeds {cap} points")
        self.error_bound = sys.field.zero()

    def _ensure(self, y):
        y = self.system.field.convert(y)
        if y not in self.closure:
            seeds = list(self.closure.points) + [y]
            closure = orbit_closure(self.system, seeds, self.cap)
            if not closure.finite:
                raise CapacityError(f"orbit closure exceeds {self.cap} points")
            self.closure = closure
        return y

    def ki(self, y) -> KiVector:
        from .orbits import ki_exact

        y = self._ensure(y)
        return ki_exact(self.system, self.closure, y)

    def visits(self, y) -> VisitWeights:
        from .orbits import visit_weights

        y = self._ensure(y)
        return visit_weights(self.system, self.closure, y)


class TruncatedProvider:
    """Depth-limited ``K_n(y)`` and visit weights with the bound ``rho^(depth+1)/(1-rho)``."""

    mode = TRUNCATED

    def __init__(self, sys: RandomSystem, depth: int = DEFAULT_DEPTH, cap: int = 200_000):
        self.system = sys
        self.depth = depth
        self.cap = cap
        self._cache = {}
        rho = contraction_bound(sys)
        self.error_bound = float(rho) ** (depth + 1) / (1 - float(rho))

    def _orbit(self, y):
        y = self.system.field.convert(y)
        if y not in self._cache:
            self._cache[y] = truncated_orbit(self.system, y, self.depth, self.cap)
        return self._cache[y]

    def ki(self, y) -> KiVector:
        return self._orbit(y).ki

    def visits(self, y) -> VisitWeights:
        return self._orbit(y).visits

    @property
    def coarsened(self) -> bool:
        return any(o.coarsened for o in self._cache.values())


@dataclass
class FundamentalMatrix:
    """``N x (N-1)`` matrix ``mu[n][i]`` plus the ``K_n`` values that fed it."""

    system: RandomSystem
    entries: list
    mode: str
    error_bound: object
    ki: dict
    provenance: dict = field(default_factory=dict)

    @property
    def shape(self):
        return len(self.entries), len(self.entries[0]) if self.entries else 0

    def column(self, i):
        return [row[i] for row in self.entries]

    def __getitem__(self, idx):
        n, i = idx
        return self.entries[n][i]


@dataclass
class KernelBasis:
    """Basis vectors ``gamma`` of ``{gamma : M gamma = 0}``."""

    vectors: list
    mode: str
    rank: int
    singular_values: list = field(default_factory=list)
    threshold: float = 0.0

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __len__(self):
        return len(self.vectors)

    def __getitem__(self, k):
        return self.vectors[k]


def build_matrix(sys: RandomSystem, provider=None) -> FundamentalMatrix:
    """Assemble ``mu[n][i] = sum_j [(p_j/k_{i,j})(1[n=i] + K_n(a_{i,j})) - (p_j/k_{i+1,j})(1[n=i+1] + K_n(b_{i,j}))]``."""
    if provider is None:
        provider = ExactProvider(sys)
    f = sys.field
    N, nm = sys.n_intervals, sys.n_maps
    ci = critical_images(sys)
    ki = {}
    prov = {}

    def K(y):
        if y not in ki:
            ki[y] = provider.ki(y)
        return ki[y]

    entries = [[f.zero()] * (N - 1) for _ in range(N)]
    for i in range(N - 1):
        prov[i] = []
        for j in range(nm):
            a, b = ci.a[i][j], ci.b[i][j]
            wa, wb = sys.weight(i, j), sys.weight(i + 1, j)
            ka, kb = K(a), K(b)
            prov[i].extend([a, b])
            for n in range(N):
                entries[n][i] += wa * ((1 if n == i else 0) + ka[n]) - wb * ((1 if n == i + 1 else 0) + kb[n])
    bound = provider.error_bound
    if provider.mode == TRUNCATED:
        # entry error <= sum_j p_j (1/|k_{i,j}| + 1/|k_{i+1,j}|) * tail bound <= 2 rho * tail bound
        bound = 2 * float(contraction_bound(sys)) * bound
    return FundamentalMatrix(sys, entries, provider.mode, bound, ki, prov)


def kernel(M: FundamentalMatrix, tau: float = TAU_RANK) -> KernelBasis:
    """Null space of ``M``.

    Exact mode uses fraction-free elimination and asserts ``rank <= N-2``.
    Truncated or float mode uses an SVD, treating singular values below
    ``max(tau * s_max, 10 * sqrt(N(N-1)) * entry bound)`` as zero.
    """
    sys = M.system
    f = sys.field
    N = sys.n_intervals
    if N < 2:
        return KernelBasis([], M.mode, 0)
    if M.mode == EXACT and f.exact:
        _, pivots = bareiss_echelon(f, M.entries)
        basis = nullspace(f, M.entries)
        if not basis or len(pivots) > N - 2:
            raise SelfCheckError(f"exact fundamental matrix has rank {len(pivots)} > N-2 = {N - 2}")
        return KernelBasis(basis, EXACT, len(pivots))
    floor = 10 * math.sqrt(N * (N - 1)) * float(M.error_bound)
    basis, sv, thr = float_nullspace(M.entries, rel_tol=tau, abs_floor=floor)
    return KernelBasis(basis, M.mode, (N - 1) - len(basis), sv, thr)


def _is_zero(f, x, tol):
    if tol is None:
        return f.is_zero(x)
    return abs(float(x)) <= tol


@dataclass
class CheckReport:
    ok: bool
    checks: list
    skipped: list

    def failures(self):
        return [c for c in self.checks if not c[1]]


def self_check(M: FundamentalMatrix, basis: KernelBasis | None = None, tol=None, raise_on_failure: bool = True):
    """Column identities ``sum_n K_n mu[n][i] = 0``, ``sum_n D_n mu[n][i] = 0`` and
    both orthogonal relations for every kernel vector.

    Checks are exact unless ``tol`` is given.  If some ``S_n = 0`` the ``K``/``D``
    identities are skipped and recorded as such.
    """
    sys = M.system
    f = sys.field
    N, nm = sys.n_intervals, sys.n_maps
    checks, skipped = [], []
    try:
        Kc, Dc = kd_values(sys)
    except UnsupportedConfigurationError as exc:
        Kc = Dc = None
        skipped.append(f"K/D column identities: {exc}")
    if Kc is not None:
        for i in range(N - 1):
            col = M.column(i)
            sk = sum((Kc[n] * col[n] for n in range(N)), f.zero())
            sd = sum((Dc[n] * col[n] for n in range(N)), f.zero())
            checks.append((f"sum K_n mu[n][{i}]", _is_zero(f, sk, tol), sk))
            checks.append((f"sum D_n mu[n][{i}]", _is_zero(f, sd, tol), sd))
    if basis is None:
        basis = kernel(M)
    ci = critical_images(sys)
    S = s_values(sys)
    if any(f.is_zero(s) for s in S):
        skipped.append("orthogonal relations: some S_n = 0")
    else:
        for g_idx, g in enumerate(basis):
            for i in range(1, N):
                ra = g[i - 1]
                rb = g[i - 1]
                for m in range(N - 1):
                    for j in range(nm):
                        wa, wb = sys.weight(m, j), sys.weight(m + 1, j)
                        aA, aB = ka_kb(sys, M.ki[ci.a[m][j]], i)
                        bA, bB = ka_kb(sys, M.ki[ci.b[m][j]], i)
                        ra = ra + g[m] * (wa * aA - wb * bA)
                        rb = rb - g[m] * (wa * aB - wb * bB)
                checks.append((f"orthogonal A, gamma {g_idx}, i={i}", _is_zero(f, ra, tol), ra))
                checks.append((f"orthogonal B, gamma {g_idx}, i={i}", _is_zero(f, rb, tol), rb))
    report = CheckReport(all(c[1] for c in checks), checks, skipped)
    if raise_on_failure and not report.ok:
        raise SelfCheckError("; ".join(f"{name} = {val}" for name, _, val in report.failures()))
    return report


def identity_check(sys: RandomSystem, ki: KiVector, tol=None):
    """``sum_n K_n K_n(y) = 1`` and ``-sum_n D_n K_n(y) = y`` at one point; returns the two residuals."""
    f = sys.field
    Kc, Dc = kd_values(sys)
    r1 = sum((Kc[n] * ki[n] for n in range(sys.n_intervals)), f.zero()) - 1
    r2 = -sum((Dc[n] * ki[n] for n in range(sys.n_intervals)), f.zero()) - ki.y
    return _is_zero(f, r1, tol) and _is_zero(f, r2, tol), r1, r2


def _fmt(sys, x):
    if isinstance(x, float) or isinstance(sys.field, FloatField):
        return repr(float(x))
    return sys.field.format(x)


def matrix_to_csv(M: FundamentalMatrix) -> str:
    """One row per interval, one column per interior partition point, exact strings."""
    lines = [",".join(["row"] + [f"z{i + 1}" for i in range(M.shape[1])])]
    for n, row in enumerate(M.entries):
        lines.append(",".join([f"I{n + 1}"] + [_fmt(M.system, v) for v in row]))
    return "\n".join(lines) + "\n"


def matrix_to_json(M: FundamentalMatrix, basis: KernelBasis | None = None) -> str:
    sys = M.system
    doc = {
        "mode": M.mode,
        "error_bound": _fmt(sys, M.error_bound) if M.mode != EXACT else "0",
        "matrix": [[_fmt(sys, v) for v in row] for row in M.entries],
    }
    if basis is not None:
        doc["kernel"] = [[_fmt(sys, v) for v in g] for g in basis]
        doc["rank"] = basis.rank
        if basis.singular_values:
            doc["singular_values"] = basis.singular_values
            doc["threshold"] = basis.threshold
    return json.dumps(doc, indent=2)
