"""Invariant functions h_gamma as step functions, the random transfer operator, and invariance checks."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .fundamental import (
    EXACT,
    TRUNCATED,
    ExactProvider,
    FundamentalMatrix,
    KernelBasis,
    TruncatedProvider,
    build_matrix,
    kernel,
)
from .linalg import bareiss_echelon
from .orbits import DEFAULT_CAP, DEFAULT_DEPTH, CapacityError, VisitWeights
from .stepfunc import StepFunction, common_grid
from .system import RandomSystem, critical_images

__all__ = [
    "EPS_MERGE",
    "step_L",
    "build_h_gamma",
    "normalize",
    "positive_parts",
    "pf_apply",
    "verify_invariant",
    "InvarianceReport",
    "DensityResult",
    "invariant_densities",
    "flip_invariance_test",
    "refinement_invariance_test",
    "same_span",
    "density_to_csv",
    "density_from_csv",
    "plot_data",
]

EPS_MERGE = 1e-10


def step_L(sys: RandomSystem, visits: VisitWeights) -> StepFunction:
    """``L_y = sum_z W(z) 1_[A, z)`` for the visit weights ``W`` of ``y``."""
    A, B = sys.domain
    return StepFunction.from_pieces(A, B, [(A, z, w) for z, w in visits.w.items()])


def _h_weights(sys: RandomSystem, gamma, provider) -> dict:
    """Point weights ``c(z)`` with ``h_gamma = sum_z c(z) 1_[A, z)``."""
    ci = critical_images(sys)
    coef = {}
    for m, g in enumerate(gamma):
        if g == 0:
            continue
        for ell in range(sys.n_maps):
            for y, w in ((ci.a[m][ell], sys.weight(m, ell)), (ci.b[m][ell], -sys.weight(m + 1, ell))):
                c = g * w
                for z, wz in provider.visits(y).w.items():
                    coef[z] = coef.get(z, 0) + c * wz
    return coef


def build_h_gamma(sys: RandomSystem, gamma, provider=None, eps: float = 0.0) -> StepFunction:
    """``h_gamma = sum_m gamma_m sum_l [(p_l/k_{m,l}) L_{a_{m,l}} - (p_l/k_{m+1,l}) L_{b_{m,l}}]`` (unnormalized)."""
    if provider is None:
        provider = ExactProvider(sys)
    A, B = sys.domain
    coef = _h_weights(sys, gamma, provider)
    h = StepFunction.from_pieces(A, B, [(A, z, c) for z, c in coef.items()])
    return h.cleanup(eps) if eps else h


def normalize(h: StepFunction) -> StepFunction:
    total = h.integral()
    if total == 0:
        raise ZeroDivisionError("cannot normalize a function with zero integral")
    return h / total


def positive_parts(h: StepFunction, eps: float = 0.0):
    """``(h+ / int h+, h- / int h-)`` with ``None`` for a vanishing part."""
    A, B = h.domain
    if all((abs(v) <= eps if eps else v == 0) for v in h.values):
        raise ValueError("h is identically zero")
    pos = StepFunction.from_pieces(A, B, [(l, r, v) for l, r, v in h.pieces() if v > eps])
    neg = StepFunction.from_pieces(A, B, [(l, r, -v) for l, r, v in h.pieces() if v < -eps])
    return (
        normalize(pos) if pos.values != (0,) else None,
        normalize(neg) if neg.values != (0,) else None,
    )


def pf_apply(sys: RandomSystem, f: StepFunction) -> StepFunction:
    """Random transfer operator ``P_T f = sum_j p_j sum_{T_j y = x} f(y) / |T_j'(y)|`` computed exactly."""
    A, B = sys.domain
    if f.domain != (A, B) and not (float(f.domain[0]) == float(A) and float(f.domain[1]) == float(B)):
        raise ValueError("step function and system live on different domains")
    z = sys.partition
    pieces = []
    for l, r, v in f.pieces():
        if v == 0:
            continue
        for i in range(sys.n_intervals):
            lo, hi = max(l, z[i]), min(r, z[i + 1])
            if not lo < hi:
                continue
            for j in range(sys.n_maps):
                k, d = sys.slopes[i][j], sys.intercepts[i][j]
                u, w = k * lo + d, k * hi + d
                if w < u:
                    u, w = w, u
                pieces.append((u, w, sys.probs[j] / abs(k) * v))
    return StepFunction.from_pieces(A, B, pieces)


@dataclass
class InvarianceReport:
    ok: bool
    exact: bool
    l1_residual: float
    sup_residual: float
    tol: float | None = None

    def as_dict(self):
        return {
            "ok": self.ok,
            "exact": self.exact,
            "l1_residual": self.l1_residual,
            "sup_residual": self.sup_residual,
            "tol": self.tol,
        }


def _all_exact(h: StepFunction) -> bool:
    return not any(isinstance(v, float) for v in h.values + h.breaks)


def verify_invariant(sys: RandomSystem, h: StepFunction, tol: float | None = None) -> InvarianceReport:
    """Exact canonical equality ``P_T h == h`` when everything is exact and ``tol`` is None,
    otherwise the ``L1`` residual within ``tol`` (default ``1e-8``)."""
    ph = pf_apply(sys, h)
    diff = ph - h
    l1 = float(diff.l1_norm())
    sup = float(diff.sup_norm())
    if tol is None and sys.field.exact and _all_exact(h):
        return InvarianceReport(ph == h, True, l1, sup)
    t = 1e-8 if tol is None else tol
    return InvarianceReport(l1 <= t, False, l1, sup, t)


@dataclass
class DensityResult:
    """Everything the pipeline produced for one system."""

    system: RandomSystem
    mode: str
    matrix: FundamentalMatrix
    basis: KernelBasis
    functions: list
    densities: list
    verification: list
    depth: int | None = None
    error_bound: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return self.basis.dimension


def _provider(sys, mode, depth, cap):
    if mode == EXACT:
        return ExactProvider(sys, cap=cap)
    return TruncatedProvider(sys, depth)


def invariant_densities(
    sys: RandomSystem,
    mode: str = EXACT,
    depth: int = DEFAULT_DEPTH,
    cap: int = DEFAULT_CAP,
    tol: float | None = None,
) -> DensityResult:
    """Full pipeline: fundamental matrix, kernel, ``h_gamma`` per basis vector, normalization, invariance check.

    In exact mode a closure larger than ``cap`` downgrades the run to truncated mode.
    A basis vector whose ``h_gamma`` integrates to zero contributes its normalized
    positive and negative parts instead.
    """
    notes = []
    if mode not in (EXACT, TRUNCATED):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == EXACT and not sys.field.exact:
        notes.append("float backend: running truncated mode")
        mode = TRUNCATED
    try:
        provider = _provider(sys, mode, depth, cap)
    except CapacityError as exc:
        notes.append(f"{exc}; downgraded to truncated mode at depth {depth}")
        mode = TRUNCATED
        provider = _provider(sys, mode, depth, cap)
    M = build_matrix(sys, provider)
    basis = kernel(M)
    eps = EPS_MERGE if mode == TRUNCATED else 0.0
    funcs, dens, checks = [], [], []
    for g in basis:
        h = build_h_gamma(sys, g, provider, eps=eps)
        funcs.append(h)
        total = h.integral()
        zero_total = abs(float(total)) <= eps if eps else total == 0
        if zero_total:
            notes.append("kernel vector with zero integral: reporting positive and negative parts")
            parts = [p for p in positive_parts(h, eps) if p is not None]
        else:
            parts = [normalize(h)]
        for d in parts:
            dens.append(d)
            checks.append(verify_invariant(sys, d, tol if mode == EXACT else (tol or 1e-8)))
    bound = float(provider.error_bound) if mode == TRUNCATED else 0.0
    if mode == TRUNCATED and getattr(provider, "coarsened", False):
        notes.append("orbit measure coarsened: tail bound is no longer certified")
    return DensityResult(sys, mode, M, basis, funcs, dens, checks, depth if mode == TRUNCATED else None, bound, notes)


def _vectors(funcs, grid):
    return [f.refine_vector(grid) for f in funcs]


def _rank(sys, rows) -> int:
    if not rows:
        return 0
    if sys.field.exact and not any(isinstance(v, float) for r in rows for v in r):
        _, piv = bareiss_echelon(sys.field, rows)
        return len(piv)
    import numpy as np

    a = np.array([[float(v) for v in r] for r in rows])
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > 1e-8 * max(1.0, s[0])))


def same_span(sys: RandomSystem, first, second) -> bool:
    """Whether two lists of step functions span the same space (a.e.)."""
    grid = common_grid(list(first) + list(second))
    u, v = _vectors(first, grid), _vectors(second, grid)
    ru, rv = _rank(sys, u), _rank(sys, v)
    return ru == rv == _rank(sys, u + v)


@dataclass
class InvarianceComparison:
    ok: bool
    original: DensityResult
    modified: DensityResult
    identical: bool

    def as_dict(self):
        return {"ok": self.ok, "identical": self.identical}


def _compare(a: DensityResult, b: DensityResult) -> InvarianceComparison:
    identical = a.densities == b.densities
    return InvarianceComparison(identical or same_span(a.system, a.densities, b.densities), a, b, identical)


def flip_invariance_test(sys: RandomSystem, ell: int, **kw) -> InvarianceComparison:
    """Flip the membership flag at interior point ``z_ell`` (1-based) and compare the density sets."""
    return _compare(invariant_densities(sys, **kw), invariant_densities(sys.flipped(ell), **kw))


def refinement_invariance_test(sys: RandomSystem, c, flag: str = "L", **kw) -> InvarianceComparison:
    """Insert an extra partition point at continuity point ``c`` and compare the density sets."""
    return _compare(invariant_densities(sys, **kw), invariant_densities(sys.refined(c, flag), **kw))


def density_to_csv(sys: RandomSystem, h: StepFunction, fh=None) -> str:
    """``left,right,value,value_float`` rows with exact-string scalars."""
    fmt = sys.field.format
    buf = io.StringIO() if fh is None else fh
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["left", "right", "value", "value_float"])
    for l, r, v in h.pieces():
        vs = repr(float(v)) if isinstance(v, float) else fmt(v)
        w.writerow([fmt(l), fmt(r), vs, repr(float(v))])
    return buf.getvalue() if fh is None else ""


def density_from_csv(sys: RandomSystem, text: str) -> StepFunction:
    """Parse :func:`density_to_csv` output back into a step function over the system's domain."""
    f = sys.field
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValueError("density file has no rows")
    missing = {"left", "right", "value"} - set(rows[0])
    if missing:
        raise ValueError(f"density file lacks columns {sorted(missing)}")
    pieces = []
    for k, row in enumerate(rows, start=2):
        try:
            l, r = f.parse(row["left"]), f.parse(row["right"])
            v = f.parse(row["value"])
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"line {k}: {exc}") from exc
        pieces.append((l, r, v))
    A, B = sys.domain
    lo = min(p[0] for p in pieces)
    hi = max(p[1] for p in pieces)
    if not (f.eq(lo, A) and f.eq(hi, B)):
        raise ValueError(f"density covers [{lo}, {hi}] but the system domain is [{A}, {B}]")
    return StepFunction.from_pieces(A, B, pieces)


def plot_data(h: StepFunction, resolution: int = 512) -> str:
    lines = ["x,h"]
    lines += [f"{x!r},{y!r}" for x, y in h.sample(resolution)]
    return "\n".join(lines) + "\n"

