"""Weighted random orbits of points: visit sums K_n(y), K^A_i, K^B_i and visit weights.

Two routes are provided.  When the set of points reachable from the seeds is
finite (every gallery example), the infinite series collapse to finite linear
systems over that set and are solved exactly.  Otherwise the series are summed
up to a given depth by pushing a weighted point measure forward one step at a
time, and a certified tail bound is attached.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .linalg import solve
from .system import RandomSystem, contraction_bound

__all__ = [
    "FINITE",
    "TRUNCATED",
    "CapacityError",
    "OrbitClosure",
    "KiVector",
    "VisitWeights",
    "orbit_closure",
    "ki_exact",
    "ki_truncated",
    "visit_weights",
    "truncated_orbit",
    "ka_kb",
    "closure_to_csv",
    "depth_for_bound",
    "tail_bound",
]

FINITE = "finite"
TRUNCATED = "truncated"

DEFAULT_CAP = 10_000
DEFAULT_DEPTH = 40
EPS_MERGE = 1e-10


class CapacityError(RuntimeError):
    """The weighted point measure outgrew its configured capacity."""


class _PointIndex:
    """Point deduplication: exact keys, or eps-buckets for floats."""

    def __init__(self, sys: RandomSystem):
        self.exact = sys.field.exact
        self.eps = sys.field.eps or 1e-12
        self.index = {}
        self.points = []

    def _bucket(self, x):
        return math.floor(x / self.eps)

    def find(self, x):
        if self.exact:
            return self.index.get(x)
        b = self._bucket(x)
        for key in (b - 1, b, b + 1):
            for idx in self.index.get(key, ()):
                if abs(self.points[idx] - x) <= self.eps:
                    return idx
        return None

    def add(self, x) -> int:
        idx = len(self.points)
        self.points.append(x)
        if self.exact:
            self.index[x] = idx
        else:
            self.index.setdefault(self._bucket(x), []).append(idx)
        return idx


@dataclass
class OrbitClosure:
    """Points reachable from ``seeds`` under all maps, with weighted edges.

    ``edges`` holds ``(source, map, target, weight)`` index tuples where the
    weight is ``p_j / k_{i(x), j}``.  For a truncated closure, points at the
    last explored depth have no outgoing edges.
    """

    system: RandomSystem
    points: list
    intervals: list
    edges: list
    status: str
    depth: int
    seeds: list = field(default_factory=list)
    approximate: bool = False
    _index: dict = field(default_factory=dict, repr=False)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def finite(self) -> bool:
        return self.status == FINITE

    def index_of(self, y) -> int:
        if self.system.field.exact:
            try:
                return self._index[y]
            except KeyError:
                raise KeyError(f"{y} is not in the closure") from None
        for i, x in enumerate(self.points):
            if abs(x - y) <= (self.system.field.eps or 1e-12):
                return i
        raise KeyError(f"{y} is not in the closure")

    def __contains__(self, y) -> bool:
        try:
            self.index_of(y)
        except KeyError:
            return False
        return True

    def __len__(self):
        return len(self.points)


def orbit_closure(sys: RandomSystem, seeds, cap: int = DEFAULT_CAP) -> OrbitClosure:
    """Breadth-first closure of ``seeds`` under every map of ``sys``."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    f = sys.field
    seeds = [f.convert(s) for s in seeds]
    pidx = _PointIndex(sys)
    for s in seeds:
        if pidx.find(s) is None:
            pidx.add(s)
    frontier = list(range(len(pidx.points)))
    intervals = [sys.locate(x) for x in pidx.points]
    edges = []
    depth = 0
    status = FINITE
    A, B = sys.domain
    while frontier:
        if len(pidx.points) > cap:
            status = TRUNCATED
            break
        nxt = []
        for src in frontier:
            x = pidx.points[src]
            i = intervals[src]
            for j in range(sys.n_maps):
                y = sys.slopes[i][j] * x + sys.intercepts[i][j]
                if not f.exact:
                    y = min(max(y, A), B)
                dst = pidx.find(y)
                if dst is None:
                    dst = pidx.add(y)
                    intervals.append(sys.locate(y))
                    nxt.append(dst)
                edges.append((src, j, dst, sys.weight(i, j)))
        frontier = nxt
        depth += 1
    if status == TRUNCATED:
        depth -= 1
    index = dict(pidx.index) if f.exact else {}
    return OrbitClosure(
        sys, pidx.points, intervals, edges, status, depth, seeds, approximate=not f.exact, _index=index
    )


@dataclass(frozen=True)
class KiVector:
    """Visit sums ``K_1(y) .. K_N(y)`` (stored 0-based) with an absolute error bound."""

    y: object
    values: tuple
    error_bound: object = 0

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)


@dataclass(frozen=True)
class VisitWeights:
    """Total weight ``W(z)`` with which the random orbit of ``y`` sits at ``z``."""

    y: object
    w: dict
    error_bound: object = 0

    def total(self):
        return sum(self.w.values())


def _s_values(sys: RandomSystem):
    f = sys.field
    return [sum((sys.weight(n, j) for j in range(sys.n_maps)), f.zero()) for n in range(sys.n_intervals)]


def _require_finite(closure: OrbitClosure):
    if not closure.finite:
        raise ValueError("exact evaluation needs a FINITE closure")


def _all_ki(closure: OrbitClosure):
    """Solve ``(I - P) K = C`` for all closure points at once (cached)."""
    if "ki" in closure._cache:
        return closure._cache["ki"]
    _require_finite(closure)
    sys = closure.system
    f = sys.field
    m, N = len(closure.points), sys.n_intervals
    mat = [[f.zero()] * m for _ in range(m)]
    for r in range(m):
        mat[r][r] = f.one()
    rhs = [[f.zero()] * N for _ in range(m)]
    for src, _j, dst, w in closure.edges:
        mat[src][dst] = mat[src][dst] - w
        n = closure.intervals[src]
        rhs[src][n] = rhs[src][n] + w
    sol = solve(f, mat, rhs)
    closure._cache["ki"] = sol
    return sol


def ki_exact(sys: RandomSystem, closure: OrbitClosure, y) -> KiVector:
    """Exact ``K_n(y)`` for a point of a finite closure.

    Uses ``K_n(x) = sum_j w_{x,j} (1[n = i(x)] + K_n(T_j x))`` over the closure.
    """
    if closure.system is not sys and closure.system != sys:
        raise ValueError("closure was built for a different system")
    sol = _all_ki(closure)
    y = sys.field.convert(y)
    return KiVector(y, tuple(sol[closure.index_of(y)]), sys.field.zero())


def visit_weights(sys: RandomSystem, closure: OrbitClosure, y) -> VisitWeights:
    """Exact visit weights of ``y`` over a finite closure.

    Solves ``W(z) = 1[z = y] + sum_{T_j x = z} w_{x,j} W(x)``.
    """
    _require_finite(closure)
    f = sys.field
    y = f.convert(y)
    cache = closure._cache.setdefault("visits", {})
    key = closure.index_of(y)
    if key not in cache:
        m = len(closure.points)
        mat = [[f.zero()] * m for _ in range(m)]
        for r in range(m):
            mat[r][r] = f.one()
        for src, _j, dst, w in closure.edges:
            mat[dst][src] = mat[dst][src] - w
        rhs = [[f.one() if r == key else f.zero()] for r in range(m)]
        sol = solve(f, mat, rhs)
        cache[key] = {closure.points[r]: sol[r][0] for r in range(m) if not f.is_zero(sol[r][0])}
    return VisitWeights(y, cache[key], f.zero())


def tail_bound(rho, depth: int):
    """``rho^(depth+1) / (1 - rho)``: bound on the terms beyond ``depth``."""
    return rho ** (depth + 1) / (1 - rho)


def depth_for_bound(rho, bound: float = 1e-12) -> int:
    """Smallest depth whose tail bound is below ``bound``."""
    r = float(rho)
    if not 0 < r < 1:
        raise ValueError("rho must lie in (0, 1)")
    d = max(0, math.ceil(math.log(bound * (1 - r)) / math.log(r)) - 1)
    while tail_bound(r, d) >= bound:
        d += 1
    return d


@dataclass
class TruncatedOrbit:
    """Depth-limited series for one seed: ``K`` over steps 1..depth, ``W`` over 0..depth."""

    y: object
    ki: KiVector
    visits: VisitWeights
    depth: int
    max_support: int
    merge_radius: float = 0.0

    @property
    def coarsened(self) -> bool:
        return self.merge_radius > 0


def _merge_float(sys: RandomSystem, measure: dict, eps: float) -> dict:
    """Merge float points closer than ``eps`` that share an interval."""
    out = {}
    last = None
    for x in sorted(measure):
        w = measure[x]
        if last is not None and x - last <= eps and sys.locate(x) == sys.locate(last):
            out[last] += w
            continue
        out[x] = out.get(x, 0.0) + w
        last = x
    return out


def truncated_orbit(sys: RandomSystem, y, depth: int = DEFAULT_DEPTH, cap: int = 200_000,
                    eps_merge: float = EPS_MERGE) -> TruncatedOrbit:
    """Push the weighted point mass at ``y`` forward ``depth`` steps.

    The measure ``sum_w delta_w(y, t) * [point mass at T_w(y)]`` is kept as a
    point -> weight map, merging coincident points, so words are never
    enumerated.  Float systems dedup within the field tolerance and, past
    ``cap`` points, coarsen by merging within ``eps_merge`` (widened tenfold
    until the cap is met); exact systems raise :class:`CapacityError` instead.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    f = sys.field
    y = f.convert(y)
    A, B = sys.domain
    N = sys.n_intervals
    S = _s_values(sys)
    K = [f.zero()] * N
    W = {}
    measure = {y: f.one()}
    biggest = 1
    merge_radius = 0.0
    for t in range(depth + 1):
        for x, w in measure.items():
            W[x] = W.get(x, f.zero()) + w
        if t == depth:
            break
        nxt = {}
        for x, w in measure.items():
            i = sys.locate(x)
            K[i] = K[i] + w * S[i]
            for j in range(sys.n_maps):
                z = sys.slopes[i][j] * x + sys.intercepts[i][j]
                if not f.exact:
                    z = min(max(z, A), B)
                nxt[z] = nxt.get(z, f.zero()) + w * sys.weight(i, j)
        if not f.exact:
            nxt = _merge_float(sys, nxt, f.eps or 1e-12)
            radius = eps_merge
            while len(nxt) > cap:
                nxt = _merge_float(sys, nxt, radius)
                merge_radius = max(merge_radius, radius)
                radius *= 10
        if len(nxt) > cap:
            raise CapacityError(f"{len(nxt)} orbit points at step {t + 1} exceed cap {cap}")
        measure = {x: w for x, w in nxt.items() if w != 0}
        biggest = max(biggest, len(measure))
    if not f.exact:
        W = _merge_float(sys, W, f.eps or 1e-12)
    rho = contraction_bound(sys)
    bound = tail_bound(rho, depth)
    return TruncatedOrbit(
        y, KiVector(y, tuple(K), bound), VisitWeights(y, W, bound), depth, biggest, merge_radius
    )


def ki_truncated(sys: RandomSystem, y, depth: int = DEFAULT_DEPTH) -> KiVector:
    """``K_n(y)`` summed over words of length ``1..depth`` with bound ``rho^(depth+1)/(1-rho)``."""
    return truncated_orbit(sys, y, depth).ki


def ka_kb(sys: RandomSystem, ki, i: int):
    """``(K^A_i(y), K^B_i(y))``: inverse-average-slope weighted visits left/right of ``z_i``.

    ``i`` counts the intervals on the left side (``1 <= i <= N-1``).
    """
    if not 1 <= i <= sys.n_intervals - 1:
        raise ValueError("i must satisfy 1 <= i <= N-1")
    S = _s_values(sys)
    f = sys.field
    vals = list(ki)
    left = sum((vals[n] / S[n] for n in range(i)), f.zero())
    right = sum((vals[n] / S[n] for n in range(i, sys.n_intervals)), f.zero())
    return left, right


def closure_to_csv(closure: OrbitClosure, fh=None) -> str:
    """Diagnostic dump: one ``point,map,target,weight`` row per edge."""
    fmt = closure.system.field.format
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["point", "map", "target", "weight"])
    for src, j, dst, weight in closure.edges:
        w.writerow([fmt(closure.points[src]), j, fmt(closure.points[dst]), fmt(weight)])
    return buf.getvalue() if fh is None else ""


