"""Random piecewise-linear systems of an interval and their validation."""
from __future__ import annotations

import json
from bisect import bisect_left
from dataclasses import dataclass, field, replace

from .scalar import Field, field_from_json, parse_scalar

__all__ = [
    "LEFT",
    "RIGHT",
    "InvalidSystemError",
    "SystemFileError",
    "RandomSystem",
    "ValidationReport",
    "CriticalImages",
    "validate",
    "branch_index",
    "apply_map",
    "critical_images",
    "load_system",
    "dump_system",
    "system_from_dict",
    "system_to_dict",
]

LEFT = "L"
RIGHT = "R"


class InvalidSystemError(ValueError):
    """A system violates its structural invariants."""


class SystemFileError(ValueError):
    """A system-definition document could not be parsed.

    ``where`` names the offending field (or ``line:col`` for JSON syntax errors).
    """

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass(frozen=True)
class RandomSystem:
    """Finite family of piecewise-linear maps chosen i.i.d. with probabilities ``probs``.

    Intervals and maps are indexed from 0: ``slopes[i][j]`` is the slope of
    map ``j`` on the interval between ``partition[i]`` and ``partition[i+1]``
    (``k_{i+1,j}`` in 1-based notation).  ``flags[l]`` says which interval owns the
    interior point ``partition[l+1]``: ``LEFT`` puts it in interval ``l``,
    ``RIGHT`` in interval ``l+1``.
    """

    field: Field
    partition: tuple
    slopes: tuple
    intercepts: tuple
    probs: tuple
    flags: tuple = None
    name: str = ""

    def __post_init__(self):
        f = self.field
        conv = f.convert
        object.__setattr__(self, "partition", tuple(conv(z) for z in self.partition))
        object.__setattr__(self, "slopes", tuple(tuple(conv(k) for k in row) for row in self.slopes))
        object.__setattr__(self, "intercepts", tuple(tuple(conv(d) for d in row) for row in self.intercepts))
        object.__setattr__(self, "probs", tuple(conv(p) for p in self.probs))
        n = len(self.partition) - 1
        if self.flags is None:
            object.__setattr__(self, "flags", (LEFT,) * max(n - 1, 0))
        else:
            object.__setattr__(self, "flags", tuple(self.flags))
        self._check()

    def _check(self):
        f = self.field
        z = self.partition
        if len(z) < 2:
            raise InvalidSystemError("partition needs at least two points")
        for u, v in zip(z, z[1:]):
            if f.cmp(u, v) >= 0:
                raise InvalidSystemError("partition points must be strictly increasing")
        n, m = self.n_intervals, self.n_maps
        if m == 0:
            raise InvalidSystemError("probs must not be empty")
        if len(self.flags) != n - 1:
            raise InvalidSystemError(f"flags must have length {n - 1}")
        if any(fl not in (LEFT, RIGHT) for fl in self.flags):
            raise InvalidSystemError("flags must be 'L' or 'R'")
        for nm, rows in (("slopes", self.slopes), ("intercepts", self.intercepts)):
            if len(rows) != n or any(len(r) != m for r in rows):
                raise InvalidSystemError(f"{nm} must have shape {n}x{m}")
        if any(f.sign(p) <= 0 for p in self.probs):
            raise InvalidSystemError("probs must be positive")
        if not f.is_zero(sum(self.probs, f.zero()) - 1):
            raise InvalidSystemError("probs must sum to 1")
        A, B = self.domain
        for i in range(n):
            for j in range(m):
                k = self.slopes[i][j]
                if f.is_zero(k):
                    raise InvalidSystemError(f"slopes[{i}][{j}] is zero")
                d = self.intercepts[i][j]
                for x in (z[i], z[i + 1]):
                    y = k * x + d
                    if f.cmp(y, A) < 0 or f.cmp(y, B) > 0:
                        raise InvalidSystemError(
                            f"branch ({i},{j}) maps {f.format(x)} to {f.format(y)}, outside the domain"
                        )

    @property
    def domain(self):
        return self.partition[0], self.partition[-1]

    @property
    def n_intervals(self) -> int:
        return len(self.partition) - 1

    @property
    def n_maps(self) -> int:
        return len(self.probs)

    def locate(self, x) -> int:
        """0-based interval index of ``x`` honouring the membership flags."""
        f = self.field
        z = self.partition
        A, B = self.domain
        if f.cmp(x, A) < 0 or f.cmp(x, B) > 0:
            raise ValueError(f"{f.format(x)} lies outside the domain")
        interior = z[1:-1]
        pos = bisect_left(interior, x)
        # pos = number of interior points strictly below x (up to float fuzz)
        for cand in (pos - 1, pos):
            if 0 <= cand < len(interior) and f.eq(x, interior[cand]):
                return cand if self.flags[cand] == LEFT else cand + 1
        return pos

    def weight(self, i: int, j: int):
        """p_j / k_{i,j}: the signed inverse-slope weight of branch (i, j)."""
        return self.probs[j] / self.slopes[i][j]

    def with_flags(self, flags) -> RandomSystem:
        return replace(self, flags=tuple(flags))

    def flipped(self, ell: int) -> RandomSystem:
        """Copy with the membership of interior point ``partition[ell]`` toggled (1 <= ell <= N-1)."""
        fl = list(self.flags)
        fl[ell - 1] = RIGHT if fl[ell - 1] == LEFT else LEFT
        return self.with_flags(fl)

    def refined(self, c, flag: str = LEFT) -> RandomSystem:
        """Copy with an extra partition point ``c`` inside an interval; the maps are unchanged."""
        f = self.field
        c = f.convert(c)
        z = self.partition
        i = bisect_left(z, c) - 1
        if i < 0 or i >= self.n_intervals or f.eq(c, z[i]) or f.eq(c, z[i + 1]):
            raise ValueError("refinement point must lie strictly inside an interval")
        return replace(
            self,
            partition=z[: i + 1] + (c,) + z[i + 1 :],
            slopes=self.slopes[: i + 1] + self.slopes[i:],
            intercepts=self.intercepts[: i + 1] + self.intercepts[i:],
            flags=self.flags[:i] + (flag,) + self.flags[i:],
        )

    def converted(self, field: Field) -> RandomSystem:
        return RandomSystem(
            field, self.partition, self.slopes, self.intercepts, self.probs, self.flags, self.name
        )


@dataclass
class ValidationReport:
    rho: object
    a1_ok: bool
    a2_ok: bool
    a3_ok: bool
    a4_ok: bool
    diagnostics: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.a1_ok and self.a2_ok and self.a3_ok and self.a4_ok

    def as_dict(self, fmt=str) -> dict:
        return {
            "rho": fmt(self.rho),
            "rho_float": float(self.rho),
            "A1": self.a1_ok,
            "A2": self.a2_ok,
            "A3": self.a3_ok,
            "A4": self.a4_ok,
            "diagnostics": list(self.diagnostics),
        }


@dataclass(frozen=True)
class CriticalImages:
    """One-sided images of the interior partition points.

    ``a[i][j]`` is the limit of ``T_j`` from the left at ``partition[i+1]``,
    ``b[i][j]`` the limit from the right.
    """

    a: tuple
    b: tuple

    def points(self) -> list:
        seen = {}
        for rows in (self.a, self.b):
            for row in rows:
                for y in row:
                    seen.setdefault(y, None)
        return list(seen)


def contraction_bound(sys: RandomSystem):
    f = sys.field
    return max(
        sum((f.abs(sys.weight(i, j)) for j in range(sys.n_maps)), f.zero())
        for i in range(sys.n_intervals)
    )


def validate(sys: RandomSystem) -> ValidationReport:
    """Check the standing assumptions (A1)-(A4) and report, never raise."""
    f = sys.field
    diag = []
    rho = contraction_bound(sys)
    a2 = f.cmp(rho, 1) < 0
    if not a2:
        diag.append(f"A2: not expanding on average, rho = {f.format(rho)} >= 1")

    fixed = []
    a3 = True
    for n in range(sys.n_intervals):
        s = sum((sys.weight(n, j) for j in range(sys.n_maps)), f.zero())
        den = 1 - s
        if f.is_zero(den):
            a3 = False
            diag.append(f"A3: weighted fixed point of interval {n} undefined (S = 1)")
            continue
        num = sum((sys.weight(n, j) * sys.intercepts[n][j] for j in range(sys.n_maps)), f.zero())
        fixed.append(num / den)
    if a3 and all(f.eq(r, fixed[0]) for r in fixed):
        a3 = False
        diag.append(f"A3: all weighted fixed points coincide at {f.format(fixed[0])}")

    A, B = sys.domain
    a4 = True
    last = sys.n_intervals - 1
    for j in range(sys.n_maps):
        k, d = sys.slopes[0][j], sys.intercepts[0][j]
        want = A if f.sign(k) > 0 else B
        if not f.eq(k * A + d, want):
            a4 = False
            diag.append(f"A4: map {j} sends the left endpoint to {f.format(k * A + d)}, expected {f.format(want)}")
        k, d = sys.slopes[last][j], sys.intercepts[last][j]
        want = B if f.sign(k) > 0 else A
        if not f.eq(k * B + d, want):
            a4 = False
            diag.append(f"A4: map {j} sends the right endpoint to {f.format(k * B + d)}, expected {f.format(want)}")
    # finitely many maps and intervals by construction
    return ValidationReport(rho, True, a2, a3, a4, diag)


def branch_index(sys: RandomSystem, x) -> int:
    """1-based index ``i`` of the interval ``I_i`` containing ``x``."""
    return sys.locate(sys.field.convert(x)) + 1


def apply_map(sys: RandomSystem, j: int, x):
    """Image of ``x`` under map ``j``."""
    f = sys.field
    x = f.convert(x)
    i = sys.locate(x)
    y = sys.slopes[i][j] * x + sys.intercepts[i][j]
    A, B = sys.domain
    if f.cmp(y, A) < 0 or f.cmp(y, B) > 0:
        raise InvalidSystemError(f"T_{j}({f.format(x)}) = {f.format(y)} leaves the domain")
    if not f.exact:
        y = min(max(y, A), B)
    return y


def critical_images(sys: RandomSystem) -> CriticalImages:
    z = sys.partition
    a, b = [], []
    for i in range(sys.n_intervals - 1):
        a.append(tuple(sys.slopes[i][j] * z[i + 1] + sys.intercepts[i][j] for j in range(sys.n_maps)))
        b.append(tuple(sys.slopes[i + 1][j] * z[i + 1] + sys.intercepts[i + 1][j] for j in range(sys.n_maps)))
    return CriticalImages(tuple(a), tuple(b))


# -- system-definition files -------------------------------------------------


def system_to_dict(sys: RandomSystem) -> dict:
    fmt = sys.field.format
    return {
        "domain": [fmt(x) for x in sys.domain],
        "partition": [fmt(z) for z in sys.partition],
        "flags": list(sys.flags),
        "slopes": [[fmt(k) for k in row] for row in sys.slopes],
        "intercepts": [[fmt(d) for d in row] for row in sys.intercepts],
        "probs": [fmt(p) for p in sys.probs],
        "scalar": sys.field.to_json(),
        **({"name": sys.name} if sys.name else {}),
    }


def _scalar(value, fld: Field, where: str):
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise SystemFileError(where, f"expected a scalar string, got {value!r}")
    try:
        return fld.convert(parse_scalar(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise SystemFileError(where, str(exc)) from exc


def system_from_dict(doc: dict, field_override: Field | None = None) -> RandomSystem:
    if not isinstance(doc, dict):
        raise SystemFileError("document", "top level must be a JSON object")
    for key in ("domain", "partition", "slopes", "intercepts", "probs"):
        if key not in doc:
            raise SystemFileError(key, "missing required field")
    try:
        fld = field_from_json(doc.get("scalar", {"mode": "rational"}))
    except (ValueError, TypeError) as exc:
        raise SystemFileError("scalar", str(exc)) from exc
    if field_override is not None:
        fld = field_override

    def vec(key):
        v = doc[key]
        if not isinstance(v, list):
            raise SystemFileError(key, "expected a list")
        return [_scalar(x, fld, f"{key}[{i}]") for i, x in enumerate(v)]

    def mat(key):
        v = doc[key]
        if not isinstance(v, list) or not all(isinstance(r, list) for r in v):
            raise SystemFileError(key, "expected a list of rows")
        return [[_scalar(x, fld, f"{key}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(v)]

    domain = vec("domain")
    partition = vec("partition")
    if len(domain) != 2:
        raise SystemFileError("domain", "expected [A, B]")
    if len(partition) < 2 or partition[0] != domain[0] or partition[-1] != domain[1]:
        raise SystemFileError("partition", "must start at A and end at B")
    slopes, intercepts, probs = mat("slopes"), mat("intercepts"), vec("probs")
    flags = doc.get("flags")
    if flags is not None and (not isinstance(flags, list) or any(fl not in (LEFT, RIGHT) for fl in flags)):
        raise SystemFileError("flags", "expected a list of 'L'/'R'")
    if probs and not fld.is_zero(sum(probs, fld.zero()) - 1):
        raise SystemFileError("probs", f"probabilities sum to {fld.format(sum(probs, fld.zero()))}, not 1")
    try:
        return RandomSystem(fld, partition, slopes, intercepts, probs, flags, doc.get("name", ""))
    except InvalidSystemError as exc:
        where = next((k for k in ("probs", "slopes", "intercepts", "flags", "partition") if k in str(exc)), "system")
        raise SystemFileError(where, str(exc)) from exc


def load_system(path, field_override: Field | None = None) -> RandomSystem:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemFileError(f"line {exc.lineno} col {exc.colno}", exc.msg) from exc
    return system_from_dict(doc, field_override)


def dump_system(sys: RandomSystem, path=None) -> str:
    text = json.dumps(system_to_dict(sys), indent=2)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text

