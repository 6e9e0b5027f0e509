"""Certified real arithmetic.

Three kinds of scalar are supported:

* ``Fraction`` for exact rationals,
* :class:`QuadraticReal` for ``a + b*sqrt(d)`` inside one fixed field,
* :class:`EnclosureStream` / :class:`LazyReal` for values only known through
  rational enclosures of arbitrarily small width.

Arithmetic that stays inside one exact field stays exact. Anything else
degrades to a :class:`LazyReal`, whose comparisons are decided by refining
enclosures up to a precision cap and otherwise reported as undecided.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Union

DEFAULT_MAX_BITS = 256
DEFAULT_MAX_PRECISION = Fraction(1, 2**DEFAULT_MAX_BITS)


class PrecisionExhausted(ArithmeticError):
    """A comparison could not be separated at the allowed precision."""


class HalfIntegerTie(ArithmeticError):
    """The value is exactly ``k + 1/2``, so the nearest integer is ambiguous."""


class ScalarParseError(ValueError):
    pass


class Ordering(enum.Enum):
    LT = "LT"
    EQ = "EQ"
    GT = "GT"
    UNDECIDED = "UNDECIDED"


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> Enclosure:
        x = Fraction(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def sign(self) -> int | None:
        """Sign of every point of the interval, or None if it straddles 0."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == self.hi == 0:
            return 0
        return None

    def __add__(self, other: Enclosure) -> Enclosure:
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    def __neg__(self) -> Enclosure:
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other: Enclosure) -> Enclosure:
        return self + (-other)

    def __mul__(self, other: Enclosure) -> Enclosure:
        prods = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Enclosure(min(prods), max(prods))

    def scale(self, c: Fraction) -> Enclosure:
        if c >= 0:
            return Enclosure(self.lo * c, self.hi * c)
        return Enclosure(self.hi * c, self.lo * c)

    def __abs__(self) -> Enclosure:
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Enclosure(Fraction(0), max(-self.lo, self.hi))

    def max(self, other: Enclosure) -> Enclosure:
        return Enclosure(max(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: Enclosure) -> Enclosure | None:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Enclosure(lo, hi) if lo <= hi else None


def _sqrt_down(x: Fraction, bits: int) -> Fraction:
    if x <= 0:
        return Fraction(0)
    scale = 4**bits
    return Fraction(math.isqrt(x.numerator * scale // x.denominator), 2**bits)


def _sqrt_up(x: Fraction, bits: int) -> Fraction:
    if x <= 0:
        return Fraction(0)
    lo = _sqrt_down(x, bits)
    return lo if lo * lo == x else lo + Fraction(1, 2**bits)


def _bitlen(x: Fraction) -> int:
    """Smallest k >= 0 with |x| <= 2**k."""
    x = abs(x)
    if x <= 1:
        return 0
    return (math.ceil(x) - 1).bit_length()


def squarefree_split(d: int) -> tuple[int, int]:
    """Write d = s*s*k with k square-free; returns (s, k). Trial division, small d only."""
    if d <= 0:
        raise ValueError("d must be positive")
    s, k, f = 1, d, 2
    while f * f <= k:
        while k % (f * f) == 0:
            k //= f * f
            s *= f
        f += 1
    return s, k


class QuadraticReal:
    """Exact element ``a + b*sqrt(d)`` of Q(sqrt d), d square-free and > 1."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        self.a = Fraction(a)
        self.b = Fraction(b)
        if d <= 1 or squarefree_split(d)[0] != 1:
            raise ValueError(f"d={d} must be square-free and > 1")
        self.d = d

    @staticmethod
    def make(a, b, d: int) -> Union[Fraction, QuadraticReal]:
        """Build a + b*sqrt(d) for any positive d, collapsing to a Fraction when possible."""
        s, k = squarefree_split(d)
        b = Fraction(b) * s
        if k == 1:
            return Fraction(a) + b
        if b == 0:
            return Fraction(a)
        return QuadraticReal(a, b, k)

    def __repr__(self):
        return f"QuadraticReal({self.a}, {self.b}, {self.d})"

    def __str__(self):
        return f"{self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}*sqrt({self.d})"

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def _coerce(self, other):
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        if isinstance(other, QuadraticReal) and other.d == self.d:
            return other.a, other.b
        return None

    def __eq__(self, other):
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        return self.a == c[0] and self.b == c[1]

    def __add__(self, other):
        c = self._coerce(other)
        if c is None:
            if isinstance(other, (QuadraticReal, LazyReal, EnclosureStream)):
                return LazyReal.of(self) + other
            return NotImplemented
        return QuadraticReal.make(self.a + c[0], self.b + c[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticReal(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        c = self._coerce(other)
        if c is None:
            if isinstance(other, (QuadraticReal, LazyReal, EnclosureStream)):
                return LazyReal.of(self) * other
            return NotImplemented
        a, b = c
        return QuadraticReal.make(self.a * a + self.b * b * self.d, self.a * b + self.b * a, self.d)

    __rmul__ = __mul__

    def conjugate(self) -> QuadraticReal:
        return QuadraticReal(self.a, -self.b, self.d)

    def field_norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.d

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return QuadraticReal.make(self.a / other, self.b / other, self.d)
        if isinstance(other, QuadraticReal) and other.d == self.d:
            return self * other.conjugate() / other.field_norm()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.conjugate() * Fraction(other) / self.field_norm()
        return NotImplemented

    def __abs__(self):
        return self if self.sign() >= 0 else -self

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0 or sa == sb:
            return sa or sb
        if sa == 0:
            return sb
        return sa if self.a * self.a > self.b * self.b * self.d else sb

    def __lt__(self, other):
        return exact_sign(self - other) < 0

    def __le__(self, other):
        return exact_sign(self - other) <= 0

    def __gt__(self, other):
        return exact_sign(self - other) > 0

    def __ge__(self, other):
        return exact_sign(self - other) >= 0

    def enclosure(self, bits: int) -> Enclosure:
        k = bits + _bitlen(self.b) + 1
        root_lo = Fraction(math.isqrt(self.d * 4**k), 2**k)
        root = Enclosure(root_lo, root_lo + Fraction(1, 2**k))
        return root.scale(self.b) + Enclosure.point(self.a)

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def floor(self) -> int:
        n = math.floor(self.enclosure(32).mid)
        while exact_sign(self - n) < 0:
            n -= 1
        while exact_sign(self - (n + 1)) >= 0:
            n += 1
        return n


class _LazyOps:
    """Operator overloads shared by the enclosure-backed scalars."""

    def __add__(self, other):
        other = _lift(other)
        if other is None:
            return NotImplemented
        x, y = LazyReal.of(self), other

        def f(bits):
            return x.enclosure(bits + 1) + y.enclosure(bits + 1)

        return LazyReal(f)

    __radd__ = __add__

    def __neg__(self):
        x = LazyReal.of(self)
        return LazyReal(lambda bits: -x.enclosure(bits))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                return Fraction(0)
            x = LazyReal.of(self)
            extra = _bitlen(c)
            return LazyReal(lambda bits: x.enclosure(bits + extra).scale(c))
        other = _lift(other)
        if other is None:
            return NotImplemented
        x, y = LazyReal.of(self), other

        def f(bits):
            bound = max(abs(x.enclosure(0).lo), abs(x.enclosure(0).hi),
                        abs(y.enclosure(0).lo), abs(y.enclosure(0).hi)) + 1
            k = bits + _bitlen(bound) + 2
            return x.enclosure(k) * y.enclosure(k)

        return LazyReal(f)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        return NotImplemented

    def __abs__(self):
        x = LazyReal.of(self)
        return LazyReal(lambda bits: abs(x.enclosure(bits)))

    def __float__(self):
        return float(self.enclosure(60).mid)


class LazyReal(_LazyOps):
    """A real given by ``fn(bits) -> Enclosure`` with width about ``2**-bits``."""

    __slots__ = ("_fn", "_cache")

    def __init__(self, fn: Callable[[int], Enclosure]):
        self._fn = fn
        self._cache: dict[int, Enclosure] = {}

    @staticmethod
    def of(x) -> LazyReal:
        if isinstance(x, LazyReal):
            return x
        if isinstance(x, (int, Fraction)):
            e = Enclosure.point(x)
            return LazyReal(lambda bits: e)
        if isinstance(x, (QuadraticReal, EnclosureStream)):
            return LazyReal(x.enclosure)
        raise TypeError(f"not a real scalar: {x!r}")

    def enclosure(self, bits: int) -> Enclosure:
        e = self._cache.get(bits)
        if e is None:
            e = self._cache[bits] = self._fn(bits)
        return e

    def __repr__(self):
        return f"LazyReal(~{float(self)})"


class EnclosureStream(_LazyOps):
    """Oracle for a real: ``approx(eps)`` returns q with ``|value - q| <= eps``."""

    def __init__(self, approx: Callable[[Fraction], Fraction], label: str = "stream"):
        self._approx = approx
        self.label = label
        self._cache: dict[int, Enclosure] = {}

    def approx(self, eps) -> Fraction:
        return Fraction(self._approx(Fraction(eps)))

    def enclosure(self, bits: int) -> Enclosure:
        e = self._cache.get(bits)
        if e is None:
            eps = Fraction(1, 2 ** (bits + 1))
            q = self.approx(eps)
            e = self._cache[bits] = Enclosure(q - eps, q + eps)
        return e

    @classmethod
    def wrapping(cls, x, label: str | None = None) -> EnclosureStream:
        """Hide an exact value behind the stream contract (used for testing)."""
        lazy = LazyReal.of(x)

        def approx(eps):
            bits = max(0, math.ceil(math.log2(1 / eps))) + 1
            return lazy.enclosure(bits).mid

        return cls(approx, label or f"wrap({x})")

    @classmethod
    def from_file(cls, path: str | Path) -> EnclosureStream:
        pairs = []
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            lo, hi = (Fraction(tok) for tok in line.split())
            pairs.append(Enclosure(lo, hi))
        if not pairs:
            raise ScalarParseError(f"empty stream file {path}")

        def approx(eps):
            for e in pairs:
                if e.width / 2 <= eps:
                    return e.mid
            raise PrecisionExhausted(f"stream {path} has no enclosure of half-width <= {eps}")

        return cls(approx, f"stream:{path}")

    def __repr__(self):
        return f"EnclosureStream({self.label})"


Real = Union[int, Fraction, QuadraticReal, EnclosureStream, LazyReal]


def _lift(x):
    if isinstance(x, (int, Fraction, QuadraticReal, EnclosureStream, LazyReal)):
        return LazyReal.of(x)
    return None


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, QuadraticReal))


def exact_sign(x) -> int:
    if isinstance(x, (int, Fraction)):
        return (x > 0) - (x < 0)
    if isinstance(x, QuadraticReal):
        return x.sign()
    raise TypeError(f"sign of {x!r} is not exactly decidable")


def enclose(x, bits: int) -> Enclosure:
    if isinstance(x, (int, Fraction)):
        return Enclosure.point(x)
    return x.enclosure(bits)


def _bits_for(max_precision) -> int:
    max_precision = Fraction(max_precision)
    if max_precision <= 0:
        raise ValueError("max_precision must be positive")
    return max(1, math.ceil(math.log2(1 / max_precision)))


def certified_sign(x, max_precision=DEFAULT_MAX_PRECISION) -> int | None:
    """Exact sign, or None when enclosures never exclude 0 up to the cap."""
    if is_exact(x):
        return exact_sign(x)
    cap = _bits_for(max_precision)
    bits = 16
    while True:
        s = enclose(x, bits).sign()
        if s is not None and s != 0:
            return s
        if bits >= cap:
            return None
        bits = min(cap, bits * 2)


def compare_certified(x, y, max_precision=DEFAULT_MAX_PRECISION) -> Ordering:
    diff = x - y
    if is_exact(diff):
        s = exact_sign(diff)
        return Ordering.LT if s < 0 else Ordering.GT if s > 0 else Ordering.EQ
    s = certified_sign(diff, max_precision)
    if s is None:
        return Ordering.UNDECIDED
    return Ordering.LT if s < 0 else Ordering.GT


def sign_or_raise(x, max_precision=DEFAULT_MAX_PRECISION) -> int:
    s = certified_sign(x, max_precision)
    if s is None:
        raise PrecisionExhausted(f"cannot decide the sign of {x!r} at precision {max_precision}")
    return s


def less_than(x, y, max_precision=DEFAULT_MAX_PRECISION) -> bool:
    """Certified strict comparison; raises if undecided (including non-exact equality)."""
    order = compare_certified(x, y, max_precision)
    if order is Ordering.UNDECIDED:
        raise PrecisionExhausted(f"cannot separate {x!r} and {y!r}")
    return order is Ordering.LT


def rabs(x):
    if is_exact(x):
        return x if exact_sign(x) >= 0 else -x
    return abs(x)


def rmax(x, y):
    """Max of two reals; exact when the comparison is exactly decidable."""
    diff = x - y
    if is_exact(diff):
        return x if exact_sign(diff) >= 0 else y
    lx, ly = LazyReal.of(x), LazyReal.of(y)
    return LazyReal(lambda bits: lx.enclosure(bits).max(ly.enclosure(bits)))


def rsqrt(x):
    """Square root of a nonnegative real; exact for rational squares."""
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if n * n == x.numerator and d * d == x.denominator:
            return Fraction(n, d)
    lx = LazyReal.of(x)

    def f(bits):
        extra = 0
        while True:
            e = lx.enclosure(bits + extra)
            inner = bits + 2
            out = Enclosure(_sqrt_down(max(e.lo, Fraction(0)), inner), _sqrt_up(max(e.hi, Fraction(0)), inner))
            if out.width <= Fraction(1, 2**bits) or extra > 2 * bits + 64:
                return out
            extra += max(8, extra)

    return LazyReal(f)


def floor_certified(x, max_precision=DEFAULT_MAX_PRECISION) -> int:
    if isinstance(x, (int, Fraction)):
        return math.floor(x)
    if isinstance(x, QuadraticReal):
        return x.floor()
    cap = _bits_for(max_precision)
    bits = 16
    while True:
        e = enclose(x, bits)
        lo, hi = math.floor(e.lo), math.floor(e.hi)
        if lo == hi and e.hi < hi + 1:
            return lo
        if bits >= cap:
            raise PrecisionExhausted(f"cannot decide floor of {x!r}")
        bits = min(cap, bits * 2)


def nearest_integer(x, max_precision=DEFAULT_MAX_PRECISION) -> int:
    """Nearest integer to x; raises HalfIntegerTie when x is exactly k + 1/2."""
    half = x + Fraction(1, 2)
    if is_exact(half):
        n = floor_certified(half)
        if exact_sign(half - n) == 0:
            raise HalfIntegerTie(f"{x!r} is a half-integer")
        return n
    return floor_certified(half, max_precision)


def dist_to_nearest_integer(x, precision=Fraction(1, 2**64)) -> tuple[Enclosure, int]:
    """``(enclosure of ||x||, nearest integer)``; the enclosure width is at most ``precision``."""
    n = nearest_integer(x)
    r = rabs(x - n)
    if isinstance(r, (int, Fraction)):
        return Enclosure.point(r), n
    e = enclose(r, _bits_for(precision))
    return Enclosure(max(e.lo, Fraction(0)), e.hi), n


def fixed_point(x, k: int) -> int:
    """Integer A with ``|x * 2**k - A| <= 1``."""
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return (x.numerator << k) // x.denominator
    e = enclose(x, k + 2)
    return math.floor(e.mid * 2**k)


def _round_rel(q: Fraction, bits: int, up: bool) -> Fraction:
    """q rounded outward to about `bits` significant bits (q > 0)."""
    e = bits - (q.numerator.bit_length() - q.denominator.bit_length())
    if e >= 0:
        n, d = q.numerator << e, q.denominator
        m = -(-n // d) if up else n // d
        return Fraction(m, 1 << e)
    n, d = q.numerator, q.denominator << -e
    m = -(-n // d) if up else n // d
    return Fraction(m << -e)


def exp_enclosure(x, bits: int = 64) -> Enclosure:
    """Enclosure of e**x for rational x, relative width about 2**-bits."""
    x = Fraction(x)
    if x < 0:
        e = exp_enclosure(-x, bits + 2)
        return Enclosure(1 / e.hi, 1 / e.lo)
    s = max(0, (x * 2).numerator.bit_length() - (x * 2).denominator.bit_length() + 1)
    y = x / (1 << s)  # y <= 1/2
    work = bits + s + 16
    term, total, i = Fraction(1), Fraction(1), 0
    while True:
        i += 1
        term = term * y / i
        total += term
        if term == 0 or term * (1 << work) < total:
            break
    lo, hi = _round_rel(total, work, False), _round_rel(total + 2 * term, work, True)
    for _ in range(s):
        lo, hi = _round_rel(lo * lo, work, False), _round_rel(hi * hi, work, True)
    return Enclosure(lo, hi)


# --- text grammar ---------------------------------------------------------

_QUAD_RE = re.compile(
    r"^\(\s*([+-]?\d+)\s*([+-])\s*(\d+)\s*\*\s*sqrt\(\s*(\d+)\s*\)\s*\)\s*(?:/\s*(\d+))?$"
)


def parse_scalar(text: str):
    """Parse ``rat:p/q``, ``dec:1.25``, ``quad:(a+b*sqrt(d))/c`` or ``stream:<path>``."""
    kind, sep, body = text.strip().partition(":")
    if not sep:
        raise ScalarParseError(f"missing kind prefix in {text!r}")
    body = body.strip()
    try:
        if kind == "rat":
            return Fraction(body)
        if kind == "dec":
            if not re.fullmatch(r"[+-]?(\d+(\.\d*)?|\.\d+)", body):
                raise ScalarParseError(f"bad decimal {body!r}")
            return Fraction(body)
        if kind == "quad":
            m = _QUAD_RE.match(body)
            if not m:
                raise ScalarParseError(f"bad quadratic {body!r}")
            a, sgn, b, d, c = m.groups()
            c = int(c) if c else 1
            if c == 0:
                raise ScalarParseError("zero denominator")
            b = int(b) * (-1 if sgn == "-" else 1)
            return QuadraticReal.make(Fraction(int(a), c), Fraction(b, c), int(d))
        if kind == "stream":
            return EnclosureStream.from_file(body)
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ScalarParseError):
            raise
        raise ScalarParseError(f"cannot parse {text!r}: {exc}") from exc
    raise ScalarParseError(f"unknown scalar kind {kind!r}")


def format_scalar(x) -> str:
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return f"rat:{x.numerator}/{x.denominator}"
    if isinstance(x, QuadraticReal):
        c = math.lcm(x.a.denominator, x.b.denominator)
        a, b = int(x.a * c), int(x.b * c)
        return f"quad:({a}{'+' if b >= 0 else '-'}{abs(b)}*sqrt({x.d}))/{c}"
    if isinstance(x, EnclosureStream):
        return x.label if x.label.startswith("stream:") else f"stream:<{x.label}>"
    return f"lazy:{float(x)}"
