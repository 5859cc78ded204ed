"""Monte Carlo cross-checks: random orbits, Birkhoff frequencies and histograms.

Randomness comes from numpy's counter-based Philox generator keyed by
``(seed, orbit index)``, so every orbit has its own reproducible stream.
One uniform per step both picks the map and, rescaled within the chosen
map's probability slot, supplies a tiny dither (see :class:`SimConfig`).
"""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass

import numpy as np

from .stepfunc import StepFunction
from .system import RIGHT, RandomSystem

if os.environ.get("RPLS_PURE_PYTHON"):
    from . import _pykernels as _kernels
else:
    try:
        from . import _ckernels as _kernels
    except ImportError:  # pragma: no cover - depends on the build
        from . import _pykernels as _kernels

BACKEND = "compiled" if _kernels.__name__.endswith("_ckernels") else "python"

__all__ = [
    "BACKEND",
    "SimConfig",
    "FrequencyEstimate",
    "HistogramResult",
    "orbit_uniforms",
    "sample_orbit",
    "sample_orbits",
    "birkhoff_frequency",
    "histogram_distance",
    "histogram_to_csv",
]


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``dither`` is a relative perturbation (times ``B - A``) added at every step.
    Slopes that are even integers halve the float mantissa each step, so without
    it a float orbit collapses onto a dyadic periodic point within ~60 steps.
    """

    seed: int = 0
    n_steps: int = 100_000
    n_orbits: int = 1
    burn_in: int = 1000
    bins: int = 64
    dither: float = 1e-12
    batches: int = 100

    def __post_init__(self):
        if self.n_steps < 1 or self.n_orbits < 1 or self.burn_in < 0 or self.bins < 1:
            raise ValueError("n_steps, n_orbits, bins must be positive and burn_in non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def orbit_uniforms(cfg: SimConfig, orbit: int) -> np.ndarray:
    """The ``burn_in + n_steps`` uniforms of orbit number ``orbit``."""
    gen = np.random.Generator(np.random.Philox(key=np.array([cfg.seed, orbit], dtype=np.uint64)))
    return gen.random(cfg.burn_in + cfg.n_steps)


def _float_tables(sys: RandomSystem):
    z = np.array([float(v) for v in sys.partition[1:-1]], dtype=np.float64)
    right = np.array([1 if f == RIGHT else 0 for f in sys.flags], dtype=np.uint8)
    k = np.array([[float(v) for v in row] for row in sys.slopes], dtype=np.float64)
    d = np.array([[float(v) for v in row] for row in sys.intercepts], dtype=np.float64)
    cum = np.cumsum([float(p) for p in sys.probs])
    cum[-1] = 1.0
    A, B = (float(v) for v in sys.domain)
    return z, right, k, d, cum.astype(np.float64), A, B


def sample_orbit(sys: RandomSystem, x0, cfg: SimConfig, orbit: int = 0) -> np.ndarray:
    """Trace of ``n_steps`` points after ``burn_in`` steps, in float arithmetic."""
    z, right, k, d, cum, A, B = _float_tables(sys)
    x0 = float(x0)
    if not A <= x0 <= B:
        raise ValueError(f"x0={x0} outside [{A}, {B}]")
    u = orbit_uniforms(cfg, orbit)
    return _kernels.run_orbit(x0, u, z, right, k, d, cum, A, B, cfg.dither * (B - A), cfg.burn_in)


def _start(sys: RandomSystem, cfg: SimConfig, orbit: int) -> float:
    """Start point of orbit ``orbit``: drawn from a separate Philox stream."""
    A, B = (float(v) for v in sys.domain)
    gen = np.random.Generator(np.random.Philox(key=np.array([cfg.seed, orbit], dtype=np.uint64), counter=[0, 0, 0, 1]))
    return A + (B - A) * gen.random()


def sample_orbits(sys: RandomSystem, cfg: SimConfig, x0=None):
    """Yield the trace of each orbit in order; random starts when ``x0`` is None."""
    for r in range(cfg.n_orbits):
        yield sample_orbit(sys, _start(sys, cfg, r) if x0 is None else x0, cfg, r)


@dataclass(frozen=True)
class FrequencyEstimate:
    estimate: float
    stderr: float
    stderr_binomial: float
    stderr_batch: float
    n: int

    def as_dict(self):
        return dict(self.__dict__)


def _in_event(trace: np.ndarray, lo: float, hi: float, closed: str) -> np.ndarray:
    left = trace >= lo if closed in ("left", "both") else trace > lo
    right = trace <= hi if closed in ("right", "both") else trace < hi
    return left & right


def birkhoff_frequency(sys: RandomSystem, x0, event, cfg: SimConfig, closed: str = "right") -> FrequencyEstimate:
    """Fraction of post-burn-in trace points inside ``event = (lo, hi)``.

    ``closed`` is one of ``"right"``, ``"left"``, ``"both"``, ``"neither"``.
    The reported ``stderr`` is the larger of the binomial and the batch-means
    estimate; the latter accounts for serial correlation along an orbit.
    """
    if closed not in ("right", "left", "both", "neither"):
        raise ValueError("closed must be right, left, both or neither")
    lo, hi = float(event[0]), float(event[1])
    A, B = (float(v) for v in sys.domain)
    if lo < A or hi > B or lo > hi:
        raise ValueError("event must be a sub-interval of the domain")
    hits = np.concatenate(
        [_in_event(t, lo, hi, closed).astype(np.float64) for t in sample_orbits(sys, cfg, x0)]
    )
    n = hits.size
    est = float(hits.mean())
    se_bin = math.sqrt(max(est * (1 - est), 0.0) / n)
    nb = min(cfg.batches, n)
    size = n // nb
    means = hits[: nb * size].reshape(nb, size).mean(axis=1)
    se_batch = float(means.std(ddof=1) / math.sqrt(nb)) if nb > 1 else 0.0
    return FrequencyEstimate(est, max(se_bin, se_batch), se_bin, se_batch, n)


@dataclass
class HistogramResult:
    l1: float
    edges: np.ndarray
    empirical: np.ndarray
    exact: np.ndarray
    n: int

    def table(self):
        return [
            (float(self.edges[b]), float(self.edges[b + 1]), float(self.empirical[b]), float(self.exact[b]),
             float(self.empirical[b] - self.exact[b]))
            for b in range(len(self.empirical))
        ]


def histogram_distance(sys: RandomSystem, h: StepFunction, cfg: SimConfig, x0=None) -> HistogramResult:
    """``L1`` distance between empirical bin masses of ``n_orbits * n_steps`` samples and ``int_bin h``."""
    A, B = sys.domain
    Af, Bf = float(A), float(B)
    counts = np.zeros(cfg.bins, dtype=np.int64)
    for trace in sample_orbits(sys, cfg, x0):
        c, _ = np.histogram(trace, bins=cfg.bins, range=(Af, Bf))
        counts += c
    n = int(counts.sum())
    emp = counts / n
    edges = np.linspace(Af, Bf, cfg.bins + 1)
    exact = []
    for b in range(cfg.bins):
        lo = A + (B - A) * b / cfg.bins
        hi = A + (B - A) * (b + 1) / cfg.bins
        exact.append(float(h.integral_over(lo, hi)))
    exact = np.array(exact)
    return HistogramResult(float(np.abs(emp - exact).sum()), edges, emp, exact, n)


def histogram_to_csv(result: HistogramResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_left", "bin_right", "empirical", "exact", "diff"])
    for row in result.table():
        w.writerow([repr(v) for v in row])
    return buf.getvalue()


