"""Decay functions psi and the sigma schedule of the singular construction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..exactreal import Enclosure, exp_enclosure, format_scalar
from ..analysis import root_enclosure


class PsiError(ValueError):
    pass


class PsiFunction:
    """A strictly decreasing positive function on y >= 1, evaluated as enclosures."""

    def enclosure(self, y, bits: int = 64) -> Enclosure:
        raise NotImplementedError

    def exact(self, y) -> Fraction | None:
        """The exact value when it is rational, else None."""
        return None

    def describe(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.describe()

    @staticmethod
    def parse(text: str) -> PsiFunction:
        """``power:K``, ``exp:GAMMA`` or ``table:y1=v1,y2=v2,...``."""
        kind, _, body = text.strip().partition(":")
        try:
            if kind == "power":
                return Power(Fraction(body))
            if kind == "exp":
                return Exponential(Fraction(body))
            if kind == "table":
                pairs = [item.split("=") for item in body.split(",") if item]
                return Table([(Fraction(a), Fraction(b)) for a, b in pairs])
        except (ValueError, ZeroDivisionError) as exc:
            raise PsiError(f"bad psi {text!r}: {exc}") from None
        raise PsiError(f"unknown psi kind in {text!r}")

    def decay_check(self, r: int, ys: Sequence) -> list[tuple[Fraction, Enclosure]]:
        """Enclosures of psi(y) * y^r at sample points (should tend to 0)."""
        return [(Fraction(y), self.enclosure(y).scale(Fraction(y) ** r)) for y in ys]


@dataclass(frozen=True)
class Power(PsiFunction):
    """psi(y) = y^(-k)."""

    k: Fraction

    def __post_init__(self):
        object.__setattr__(self, "k", Fraction(self.k))
        if self.k <= 0:
            raise PsiError("power psi needs k > 0")

    def exact(self, y):
        y = Fraction(y)
        if self.k.denominator == 1:
            return 1 / y ** int(self.k)
        return None

    def enclosure(self, y, bits: int = 64) -> Enclosure:
        v = self.exact(y)
        if v is not None:
            return Enclosure.point(v)
        # y^(-a/b) = (y^-a)^(1/b)
        base = Fraction(y) ** -self.k.numerator
        return root_enclosure(base, self.k.denominator, bits + base.denominator.bit_length())

    def describe(self):
        return f"power:{self.k}"


@dataclass(frozen=True)
class Exponential(PsiFunction):
    """psi(y) = exp(-gamma y)."""

    gamma: Fraction

    def __post_init__(self):
        object.__setattr__(self, "gamma", Fraction(self.gamma))
        if self.gamma <= 0:
            raise PsiError("exponential psi needs gamma > 0")

    def enclosure(self, y, bits: int = 64) -> Enclosure:
        return exp_enclosure(-self.gamma * Fraction(y), bits)

    def exact(self, y):
        return Fraction(1) if y == 0 else None

    def describe(self):
        return f"exp:{self.gamma}"


@dataclass(frozen=True)
class Table(PsiFunction):
    """Explicit values at increasing points; between points only the step bracket is known."""

    pairs: tuple

    def __init__(self, pairs):
        pts = tuple(sorted((Fraction(a), Fraction(b)) for a, b in pairs))
        if not pts:
            raise PsiError("empty table")
        for (y0, v0), (y1, v1) in zip(pts, pts[1:]):
            if not (y1 > y0 and v1 < v0):
                raise PsiError("table must be strictly decreasing")
        if pts[-1][1] <= 0:
            raise PsiError("table values must be positive")
        object.__setattr__(self, "pairs", pts)

    def exact(self, y):
        y = Fraction(y)
        for a, v in self.pairs:
            if a == y:
                return v
        return None

    def enclosure(self, y, bits: int = 64) -> Enclosure:
        y = Fraction(y)
        if y < self.pairs[0][0] or y > self.pairs[-1][0]:
            raise PsiError(f"{y} outside the table range")
        v = self.exact(y)
        if v is not None:
            return Enclosure.point(v)
        for (y0, v0), (y1, v1) in zip(self.pairs, self.pairs[1:]):
            if y0 < y < y1:
                return Enclosure(v1, v0)
        raise AssertionError("unreachable")

    def describe(self):
        return "table:" + ",".join(f"{a}={v}" for a, v in self.pairs)


# --- schedule ---------------------------------------------------------------


def cycle_index(nu: int, r: int) -> int:
    """nu_* with nu_* = nu (mod r) and 1 <= nu_* <= r."""
    return (nu - 1) % r + 1


@dataclass(frozen=True)
class SingularSchedule:
    """sigma_{j,nu} = sigma * nu_*^j."""

    r: int
    sigma: Fraction

    def __post_init__(self):
        object.__setattr__(self, "sigma", Fraction(self.sigma))
        if self.r < 2 or self.sigma <= 0:
            raise PsiError("schedule needs r >= 2 and sigma > 0")

    def value(self, j: int, nu: int) -> Fraction:
        return self.sigma * cycle_index(nu, self.r) ** j

    @property
    def W(self) -> Fraction:
        return self.sigma * self.r ** self.r

    def matrix(self, nu: int) -> list[list[Fraction]]:
        """Rows mu = nu..nu+r-1, columns j = 1..r."""
        return [[self.value(j, mu) for j in range(1, self.r + 1)] for mu in range(nu, nu + self.r)]


def interval_det(m: Sequence[Sequence[Enclosure]]) -> Enclosure:
    """Interval enclosure of a determinant by cofactor expansion along the first row."""
    n = len(m)
    if n == 1:
        return m[0][0]
    total = Enclosure.point(0)
    for c in range(n):
        minor = [row[:c] + row[c + 1:] for row in m[1:]]
        term = m[0][c] * interval_det(minor)
        total = total + term if c % 2 == 0 else total - term
    return total


def perturbed_det(r: int, sigma, eta: Enclosure = Enclosure(Fraction(-1), Fraction(1))) -> Enclosure:
    """Enclosure of det(sigma_{j,mu} + eta_{j,mu}) over all eta_{j,mu} in `eta`."""
    sched = SingularSchedule(r, sigma)
    rows = sched.matrix(1)
    return interval_det([[Enclosure.point(v) + eta for v in row] for row in rows])


def schedule_determinant(r: int, sigma) -> Fraction:
    """Exact unperturbed determinant for rows nu_* = 1..r: sigma^r r! prod_{u<v} (v-u)."""
    vander = 1
    for u in range(1, r + 1):
        for v in range(u + 1, r + 1):
            vander *= v - u
    return Fraction(sigma) ** r * math.factorial(r) * vander


def sigma_calibrate(r: int) -> Fraction:
    """Smallest power of two sigma whose perturbed determinant interval excludes 0."""
    if r < 2:
        raise PsiError("r must be >= 2")
    sigma = Fraction(1)
    while perturbed_det(r, sigma).sign() is None:
        sigma *= 2
    return sigma


def psi_json(psi: PsiFunction) -> str:
    return psi.describe()


def enc_json(e: Enclosure) -> list[str]:
    return [format_scalar(e.lo), format_scalar(e.hi)]
