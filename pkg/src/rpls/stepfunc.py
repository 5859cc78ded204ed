"""Canonical piecewise-constant functions on a closed interval ``[A, B]``.

Only the values on the open pieces are stored; values at breakpoints are
left unspecified, so equality of canonical forms is equality almost
everywhere with respect to Lebesgue measure.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable


def _is_zero(v, eps):
    if eps:
        return abs(v) <= eps
    return v == 0


@dataclass(frozen=True)
class StepFunction:
    """Breakpoints ``x_0 = A < ... < x_m = B`` and values ``v_1..v_m`` on the open pieces."""

    breaks: tuple
    values: tuple

    def __post_init__(self):
        if len(self.breaks) != len(self.values) + 1 or len(self.breaks) < 2:
            raise ValueError("need len(breaks) == len(values) + 1 >= 2")

    # -- construction ----------------------------------------------------

    @classmethod
    def zero(cls, A, B) -> StepFunction:
        return cls((A, B), (0,))

    @classmethod
    def constant(cls, A, B, value) -> StepFunction:
        return cls.from_pieces(A, B, [(A, B, value)])

    @classmethod
    def from_pieces(cls, A, B, pieces: Iterable, eps: float = 0.0) -> StepFunction:
        """Sum of ``value * 1_(left, right)`` over ``(left, right, value)`` triples, clipped to ``[A, B]``."""
        events = {}
        for left, right, value in pieces:
            if left < A:
                left = A
            if right > B:
                right = B
            if not left < right or _is_zero(value, 0):
                continue
            events[left] = events.get(left, 0) + value
            events[right] = events.get(right, 0) - value
        xs = sorted(events)
        breaks = [A]
        values = []
        acc = 0
        for x in xs:
            if x > A:
                values.append(acc)
                breaks.append(x)
            acc = acc + events[x]
        if breaks[-1] != B:
            values.append(acc)
            breaks.append(B)
        return cls._canonical(breaks, values, eps)

    @classmethod
    def _canonical(cls, breaks, values, eps=0.0) -> StepFunction:
        out_b = [breaks[0]]
        out_v = []
        for k, v in enumerate(values):
            x = breaks[k + 1]
            if not x > out_b[-1]:
                continue
            if _is_zero(v, eps):
                v = 0 * v
            if out_v and (out_v[-1] == v or (eps and abs(out_v[-1] - v) <= eps)):
                out_b[-1] = x
                continue
            out_v.append(v)
            out_b.append(x)
        if not out_v:
            return cls((breaks[0], breaks[-1]), (0,))
        return cls(tuple(out_b), tuple(out_v))

    # -- basic properties --------------------------------------------------

    @property
    def domain(self):
        return self.breaks[0], self.breaks[-1]

    def pieces(self):
        """``(left, right, value)`` triples."""
        return [(self.breaks[k], self.breaks[k + 1], v) for k, v in enumerate(self.values)]

    def __len__(self):
        return len(self.values)

    def __call__(self, x):
        """Value on the piece containing ``x`` (a breakpoint takes the piece to its right)."""
        A, B = self.domain
        if x < A or x > B:
            raise ValueError(f"{x} outside the domain")
        k = bisect.bisect_right(self.breaks, x) - 1
        return self.values[min(k, len(self.values) - 1)]

    def sample(self, n: int = 512):
        """``n`` evenly spaced ``(x, h(x))`` pairs over the domain as floats."""
        A, B = (float(v) for v in self.domain)
        if n < 2:
            raise ValueError("need at least two sample points")
        out = []
        for t in range(n):
            x = A + (B - A) * t / (n - 1)
            k = bisect.bisect_right([float(b) for b in self.breaks], x) - 1
            out.append((x, float(self.values[min(k, len(self.values) - 1)])))
        return out

    # -- algebra -------------------------------------------------------------

    def _check_domain(self, other: StepFunction):
        if self.domain != other.domain:
            raise ValueError("step functions live on different domains")

    def __add__(self, other: StepFunction) -> StepFunction:
        self._check_domain(other)
        A, B = self.domain
        return StepFunction.from_pieces(A, B, self.pieces() + other.pieces())

    def __neg__(self) -> StepFunction:
        return StepFunction(self.breaks, tuple(-v for v in self.values))

    def __sub__(self, other: StepFunction) -> StepFunction:
        return self + (-other)

    def scale(self, c) -> StepFunction:
        A, B = self.domain
        return StepFunction._canonical(list(self.breaks), [c * v for v in self.values])

    def __mul__(self, c):
        if isinstance(c, StepFunction):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.scale(1 / c)

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return self.breaks == other.breaks and self.values == other.values

    def __hash__(self):
        return hash((self.breaks, self.values))

    # -- measures ------------------------------------------------------------

    def integral(self):
        return sum((v * (r - l) for l, r, v in self.pieces()), 0 * self.values[0])

    def integral_over(self, a, b):
        """Integral over ``(a, b)``; endpoints do not matter."""
        total = 0 * self.values[0]
        for l, r, v in self.pieces():
            lo, hi = max(l, a), min(r, b)
            if lo < hi:
                total = total + v * (hi - lo)
        return total

    def l1_norm(self):
        return sum((abs(v) * (r - l) for l, r, v in self.pieces()), 0 * self.values[0])

    def sup_norm(self):
        return max(abs(v) for v in self.values)

    def is_nonnegative(self) -> bool:
        return all(v >= 0 for v in self.values)

    def cleanup(self, eps: float) -> StepFunction:
        """Merge breakpoints closer than ``eps`` and zero out values below ``eps``.

        A merged cluster keeps its first breakpoint; the mass lost is at most
        ``eps`` times the local jump per merge.
        """
        b = [self.breaks[0]]
        v = []
        for k, val in enumerate(self.values):
            x = self.breaks[k + 1]
            if x - b[-1] <= eps and k + 1 < len(self.breaks) - 1:
                # drop the short piece, extending the next one leftwards
                continue
            v.append(val)
            b.append(x)
        return StepFunction._canonical(b, v, eps)

    def refine_vector(self, grid):
        """Values of ``self`` on the pieces of a common refinement ``grid``."""
        return [self((grid[k] + grid[k + 1]) / 2) for k in range(len(grid) - 1)]

    def __repr__(self):
        return f"StepFunction({[(str(l), str(r), str(v)) for l, r, v in self.pieces()]})"


def common_grid(funcs) -> list:
    """Union of breakpoints of several step functions on the same domain."""
    pts = set()
    for f in funcs:
        pts.update(f.breaks)
    return sorted(pts)
