"""Scalar backends: exact rationals, exact quadratic fields Q(sqrt d), and float64.

Elements are plain Python numbers (:class:`fractions.Fraction`, :class:`float`)
or :class:`QuadraticNumber`.  A :class:`Field` object describes the backend in
use: it converts, parses, formats and compares elements, and it carries the
comparison tolerance for the float backend.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from numbers import Rational

__all__ = [
    "QuadraticNumber",
    "Field",
    "RationalField",
    "QuadraticField",
    "FloatField",
    "RATIONAL",
    "golden_ratio",
    "parse_scalar",
    "format_scalar",
    "field_for",
]


def _squarefree(d: int) -> bool:
    if d < 2:
        return False
    f = 2
    while f * f <= d:
        if d % (f * f) == 0:
            return False
        f += 1
    return True


@total_ordering
class QuadraticNumber:
    """The number ``a + b*sqrt(d)`` with rational ``a``, ``b``.

    ``d`` must be a squarefree integer greater than one, which makes the
    pair ``(a, b)`` a canonical representation.  Instances compare and hash
    equal to the rational ``a`` whenever ``b == 0``, so they mix freely with
    :class:`~fractions.Fraction` in dictionaries and sorted containers.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d: int = 5):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.d = d

    def _coerce(self, other):
        if isinstance(other, QuadraticNumber):
            if other.d != self.d:
                raise ValueError(f"cannot mix sqrt({self.d}) and sqrt({other.d})")
            return other
        if isinstance(other, (int, Rational)):
            return QuadraticNumber(other, 0, self.d)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(self.a + o.a, self.b + o.b, self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.d)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadraticNumber(self.a - o.a, self.b - o.b, self.d)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b, c, e = self.a, self.b, o.a, o.b
        return QuadraticNumber(a * c + b * e * self.d, a * e + b * c, self.d)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def conjugate(self) -> QuadraticNumber:
        return QuadraticNumber(self.a, -self.b, self.d)

    def inverse(self) -> QuadraticNumber:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in quadratic field")
        return QuadraticNumber(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadraticNumber(1, 0, self.d)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: |a| vs |b|sqrt(d)
        diff = a * a - b * b * self.d
        return sa if diff > 0 else sb

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __eq__(self, other):
        if isinstance(other, QuadraticNumber):
            return self.a == other.a and self.b == other.b and (self.d == other.d or self.b == 0)
        if isinstance(other, (int, Rational)):
            return self.b == 0 and self.a == other
        if isinstance(other, float):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __lt__(self, other):
        if isinstance(other, float):
            return float(self) < other
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        return f"QuadraticNumber({self.a!s}, {self.b!s}, d={self.d})"

    def __str__(self):
        return format_scalar(self)


def golden_ratio() -> QuadraticNumber:
    """(1 + sqrt 5)/2 as an exact element of Q(sqrt 5)."""
    return QuadraticNumber(Fraction(1, 2), Fraction(1, 2), 5)


_QUAD_RE = re.compile(
    r"^(?P<a>.*?)(?P<b>[+-]?\s*[\d./]*)\s*\*?\s*sqrt\(\s*(?P<d>\d+)\s*\)\s*$"
)


def _parse_rational(text: str) -> Fraction:
    t = text.replace(" ", "")
    if "/" in t:
        num, den = t.split("/")
        return Fraction(num) / Fraction(den)
    return Fraction(t)


def parse_scalar(text, field: Field | None = None):
    """Parse ``"a/b"``, ``"1.8"`` or ``"a/b+c/e*sqrt(d)"`` into an exact scalar.

    Decimal literals are read exactly (``"1.8"`` is ``9/5``).  When ``field`` is
    given the value is converted into it.
    """
    if isinstance(text, (int, Fraction, QuadraticNumber)):
        value = text
    elif isinstance(text, float):
        value = text
    else:
        s = str(text).strip()
        if not s:
            raise ValueError("empty scalar literal")
        if "sqrt" in s:
            m = _QUAD_RE.match(s)
            if not m:
                raise ValueError(f"malformed scalar literal {text!r}")
            try:
                head = m.group("a").strip()
                a = _parse_rational(head) if head else Fraction(0)
                braw = m.group("b").replace(" ", "")
                if braw in ("", "+"):
                    b = Fraction(1)
                elif braw == "-":
                    b = Fraction(-1)
                else:
                    b = _parse_rational(braw)
                d = int(m.group("d"))
                if not _squarefree(d):
                    raise ValueError(f"sqrt({d}): d must be squarefree and > 1")
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"malformed scalar literal {text!r}") from exc
            value = QuadraticNumber(a, b, d)
        else:
            try:
                value = _parse_rational(s)
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"malformed scalar literal {text!r}") from exc
    if field is not None:
        value = field.convert(value)
    return value


def format_scalar(x) -> str:
    """Inverse of :func:`parse_scalar` for exact values; ``repr`` for floats."""
    if isinstance(x, QuadraticNumber):
        if x.b == 0:
            return str(x.a)
        head = f"{x.a}" if x.a != 0 else ""
        sign = "-" if x.b < 0 else ("+" if head else "")
        return f"{head}{sign}{abs(x.b)}*sqrt({x.d})"
    if isinstance(x, float):
        return repr(x)
    return str(Fraction(x))


class Field:
    """Arithmetic backend descriptor."""

    name = "abstract"
    exact = True
    eps = 0.0

    def convert(self, x):
        raise NotImplementedError

    def parse(self, text):
        return parse_scalar(text, self)

    def format(self, x) -> str:
        return format_scalar(x)

    def zero(self):
        return self.convert(0)

    def one(self):
        return self.convert(1)

    def sign(self, x) -> int:
        if isinstance(x, QuadraticNumber):
            return x.sign()
        return (x > 0) - (x < 0)

    def cmp(self, x, y) -> int:
        return self.sign(x - y)

    def eq(self, x, y) -> bool:
        return self.cmp(x, y) == 0

    def is_zero(self, x) -> bool:
        return self.sign(x) == 0

    def abs(self, x):
        return -x if self.sign(x) < 0 else x

    def to_float(self, x) -> float:
        return float(x)

    def to_json(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self.__dict__ == other.__dict__

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.__dict__.items()))))

    def __repr__(self):
        return f"{type(self).__name__}()"


class RationalField(Field):
    name = "rational"

    def convert(self, x):
        if isinstance(x, QuadraticNumber):
            if x.b != 0:
                raise ValueError(f"{x} is not rational")
            return x.a
        if isinstance(x, float):
            # floats enter only from user literals; keep the decimal they print as
            return Fraction(repr(x))
        return Fraction(x)

    def to_json(self):
        return {"mode": "rational"}


class QuadraticField(Field):
    name = "quadratic"

    def __init__(self, d: int = 5):
        if not _squarefree(d):
            raise ValueError(f"d={d} must be a squarefree integer > 1")
        self.d = d

    def convert(self, x):
        if isinstance(x, QuadraticNumber):
            if x.b != 0 and x.d != self.d:
                raise ValueError(f"{x} does not lie in Q(sqrt({self.d}))")
            return QuadraticNumber(x.a, x.b, self.d)
        if isinstance(x, float):
            x = Fraction(repr(x))
        return QuadraticNumber(x, 0, self.d)

    def to_json(self):
        return {"mode": "quadratic", "d": self.d}

    def __repr__(self):
        return f"QuadraticField({self.d})"


class FloatField(Field):
    """float64 backend with a global comparison tolerance."""

    name = "float"
    exact = False

    def __init__(self, eps: float = 1e-12):
        self.eps = eps

    def convert(self, x):
        return float(x)

    def sign(self, x) -> int:
        if x > self.eps:
            return 1
        if x < -self.eps:
            return -1
        return 0

    def format(self, x) -> str:
        return repr(float(x))

    def to_json(self):
        return {"mode": "float", "eps": self.eps}

    def __repr__(self):
        return f"FloatField(eps={self.eps})"


RATIONAL = RationalField()


def field_for(*values) -> Field:
    """Smallest backend containing all ``values``."""
    d = None
    for v in values:
        if isinstance(v, float):
            return FloatField()
        if isinstance(v, QuadraticNumber) and v.b != 0:
            if d is not None and d != v.d:
                raise ValueError("values from different quadratic fields")
            d = v.d
    return QuadraticField(d) if d is not None else RATIONAL


def field_from_json(spec: dict) -> Field:
    mode = spec.get("mode", "rational")
    if mode == "rational":
        return RATIONAL
    if mode == "quadratic":
        if "d" not in spec:
            raise ValueError("scalar.d is required for quadratic mode")
        return QuadraticField(int(spec["d"]))
    if mode == "float":
        return FloatField(float(spec.get("eps", 1e-12)))
    raise ValueError(f"unknown scalar mode {mode!r}")
