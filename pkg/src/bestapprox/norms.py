"""Convex O-symmetric gauges: sup, Euclidean and rational polytope norms."""

from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import intmat
from .exactreal import (
    DEFAULT_MAX_PRECISION,
    Enclosure,
    Ordering,
    PrecisionExhausted,
    compare_certified,
    enclose,
    exact_sign,
    floor_certified,
    is_exact,
    rabs,
    rmax,
    rsqrt,
)


class NormError(ValueError):
    pass


class TieAtOptimum(ArithmeticError):
    """Two distinct integer points reach the same minimal gauge value."""

    def __init__(self, msg, points=()):
        super().__init__(msg)
        self.points = list(points)


# rational bounds on pi, used only for the Euclidean ball volume enclosure
_PI_LO = Fraction(333, 106)
_PI_HI = Fraction(355, 113)


@dataclass(frozen=True)
class Norm:
    """A norm on R^n.

    ``kind`` is ``"sup"``, ``"l2"`` or ``"poly"``. Polytope (and sup) norms
    carry ``facets``: pairs ``(c, d)`` with unit ball ``{x : |<c,x>| <= d}``.
    """

    kind: str
    dim: int
    facets: tuple[tuple[tuple[Fraction, ...], Fraction], ...] = ()
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    # --- construction -----------------------------------------------------

    @classmethod
    def sup(cls, n: int) -> Norm:
        facets = tuple((tuple(Fraction(int(i == j)) for j in range(n)), Fraction(1)) for i in range(n))
        return cls("sup", n, facets, "sup")

    @classmethod
    def euclidean(cls, n: int) -> Norm:
        return cls("l2", n, (), "l2")

    @classmethod
    def polytope(cls, facets, name: str | None = None) -> Norm:
        fs = []
        for c, d in facets:
            c = tuple(Fraction(v) for v in c)
            d = Fraction(d)
            if d <= 0:
                raise NormError("facet offsets must be positive (0 must be interior)")
            if not any(c):
                raise NormError("zero facet normal")
            fs.append((c, d))
        if not fs:
            raise NormError("polytope norm needs facets")
        n = len(fs[0][0])
        if any(len(c) != n for c, _ in fs):
            raise NormError("facet normals of mixed dimension")
        if intmat.rank([list(c) for c, _ in fs]) < n:
            raise NormError("unit ball is unbounded (facet normals do not span R^n)")
        text = "poly:" + json.dumps([[str(v) for v in c] + [str(d)] for c, d in fs]).replace(" ", "").replace('"', "")
        return cls("poly", n, tuple(fs), name or text)

    @classmethod
    def fstar(cls) -> Norm:
        """The norm with unit ball ``|x1 + x2| <= 4, |x1 - x2| <= 1``."""
        return cls.polytope([((1, 1), 4), ((1, -1), 1)], name="poly:fstar")

    @classmethod
    def parse(cls, text: str, dim: int | None = None) -> Norm:
        text = text.strip()
        if text in ("sup", "l2"):
            if dim is None:
                raise NormError(f"{text} needs a dimension")
            return cls.sup(dim) if text == "sup" else cls.euclidean(dim)
        if text == "poly:fstar":
            norm = cls.fstar()
        elif text.startswith("poly:"):
            try:
                rows = json.loads(_quote_fractions(text[5:]))
                norm = cls.polytope([(row[:-1], row[-1]) for row in rows])
            except (ValueError, TypeError, IndexError) as exc:
                raise NormError(f"bad polytope norm {text!r}: {exc}") from exc
        else:
            raise NormError(f"unknown norm {text!r}")
        if dim is not None and norm.dim != dim:
            raise NormError(f"norm has dimension {norm.dim}, target has {dim}")
        return norm

    @property
    def strictly_convex(self) -> bool:
        return self.kind == "l2"

    @property
    def is_polytope(self) -> bool:
        return self.kind in ("sup", "poly")

    def __str__(self):
        return self.name

    # --- evaluation -------------------------------------------------------

    def _check_dim(self, x):
        if len(x) != self.dim:
            raise NormError(f"vector of length {len(x)} for a norm on R^{self.dim}")

    def __call__(self, x: Sequence):
        return gauge(self, x)

    @property
    def integer_facets(self) -> tuple[list[list[int]], int]:
        """Integer rows C and a scale L with f(x) = max_i |C_i . x| / L (polytope norms)."""
        if "intf" not in self._cache:
            scaled = [[v / d for v in c] for c, d in self.facets]
            lcm = 1
            for row in scaled:
                for v in row:
                    lcm = math.lcm(lcm, v.denominator)
            self._cache["intf"] = ([[int(v * lcm) for v in row] for row in scaled], lcm)
        return self._cache["intf"]

    # --- geometry ---------------------------------------------------------

    def vertices(self) -> list[tuple[Fraction, ...]]:
        """Exact vertices of a polytope unit ball."""
        if not self.is_polytope:
            raise NormError("vertices are defined for polytope norms only")
        if "verts" in self._cache:
            return self._cache["verts"]
        n = self.dim
        verts = set()
        for subset in itertools.combinations(self.facets, n):
            normals = [c for c, _ in subset]
            if intmat.det_rational(normals) == 0:
                continue
            for signs in itertools.product((1, -1), repeat=n):
                x = intmat.solve(normals, [s * d for s, (_, d) in zip(signs, subset)])
                if all(abs(sum(ci * xi for ci, xi in zip(c, x))) <= d for c, d in self.facets):
                    verts.add(tuple(x))
        self._cache["verts"] = sorted(verts)
        return self._cache["verts"]

    def max_over_cube(self):
        """r_f = max f over the sup unit ball (attained at a cube vertex)."""
        if self.kind == "l2":
            return rsqrt(Fraction(self.dim))
        best = Fraction(0)
        for corner in itertools.product((1, -1), repeat=self.dim):
            best = max(best, gauge(self, corner))
        return best

    def sup_extent(self) -> Fraction:
        """E with |x|_inf <= E * f(x) for all x."""
        if self.kind == "l2":
            return Fraction(1)
        return max(abs(v) for vert in self.vertices() for v in vert)

    def volume(self) -> Enclosure:
        """Enclosure of Vol(B_f^1); a point enclosure for polytopes in dimension <= 3."""
        if "vol" in self._cache:
            return self._cache["vol"]
        n = self.dim
        if self.kind == "l2":
            lo, hi = _ball_volume(n)
            vol = Enclosure(lo, hi)
        elif self.kind == "sup":
            vol = Enclosure.point(2**n)
        elif n == 1:
            vol = Enclosure.point(2 * self.sup_extent())
        elif n == 2:
            vol = Enclosure.point(_polygon_area(self.vertices()))
        elif n == 3:
            vol = Enclosure.point(_polytope_volume_3d(self))
        else:
            r = self.max_over_cube()
            ext = [max(abs(v[j]) for v in self.vertices()) for j in range(n)]
            vol = Enclosure((2 / r) ** n, math.prod(2 * e for e in ext))
        self._cache["vol"] = vol
        return vol

    def boundary_polygon(self) -> list[tuple[Fraction, Fraction]]:
        """Unit-ball vertices in counterclockwise order (2-D polytopes)."""
        if self.dim != 2 or not self.is_polytope:
            raise NormError("boundary polygon needs a 2-D polytope norm")
        return _ccw_sort(self.vertices())


def _quote_fractions(text: str) -> str:
    import re

    return re.sub(r"(-?\d+(?:/\d+)?(?:\.\d+)?)", r'"\1"', text).replace('""', '"')


def _ball_volume(n: int) -> tuple[Fraction, Fraction]:
    lo, hi = (Fraction(1), Fraction(1)) if n % 2 == 0 else (Fraction(2), Fraction(2))
    for k in range(2 if n % 2 == 0 else 3, n + 1, 2):
        lo *= 2 * _PI_LO / k
        hi *= 2 * _PI_HI / k
    return lo, hi


def _ccw_sort(points):
    cx = sum(p[0] for p in points) / len(points)
    cy = sum(p[1] for p in points) / len(points)

    def half(p):
        dx, dy = p[0] - cx, p[1] - cy
        return 0 if (dy > 0 or (dy == 0 and dx > 0)) else 1

    def cmp(p, q):
        hp, hq = half(p), half(q)
        if hp != hq:
            return hp - hq
        cross = (p[0] - cx) * (q[1] - cy) - (p[1] - cy) * (q[0] - cx)
        return -1 if cross > 0 else 1 if cross < 0 else 0

    return sorted(points, key=functools.cmp_to_key(cmp))


def _polygon_area(points) -> Fraction:
    pts = _ccw_sort(points)
    s = Fraction(0)
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        s += x0 * y1 - x1 * y0
    return abs(s) / 2


def _polytope_volume_3d(norm: Norm) -> Fraction:
    verts = norm.vertices()
    total = Fraction(0)
    for c, d in norm.facets:
        for s in (1, -1):
            face = [v for v in verts if sum(ci * vi for ci, vi in zip(c, v)) == s * d]
            if len(face) < 3:
                continue
            drop = max(range(3), key=lambda j: abs(c[j]))
            keep = [j for j in range(3) if j != drop]
            order = _ccw_sort([(v[keep[0]], v[keep[1]], v) for v in face])
            ring = [p[2] for p in order]
            # fan from the origin over a fan triangulation of the face
            for a, b in zip(ring[1:-1], ring[2:]):
                total += abs(intmat.det_rational([ring[0], a, b])) / 6
    return total


def _sign_free_max(values):
    best = values[0]
    for v in values[1:]:
        best = rmax(best, v)
    return best


def gauge(f: Norm, x: Sequence):
    """f(x): a Fraction for polytope norms at rational points, otherwise an exact or lazy real."""
    f._check_dim(x)
    if f.kind == "sup":
        return _sign_free_max([rabs(v) for v in x])
    if f.kind == "poly":
        terms = []
        for c, d in f.facets:
            s = 0
            for ci, xi in zip(c, x):
                if ci:
                    s = s + xi * ci
            terms.append(rabs(s / d) if is_exact(s) else abs(s) / d)
        return _sign_free_max(terms)
    sq = 0
    for v in x:
        sq = sq + v * v
    return rsqrt(sq)


def gauge_key(f: Norm, x: Sequence):
    """A monotone image of f(x) that stays exact where possible (f^2 for Euclidean)."""
    if f.kind == "l2":
        f._check_dim(x)
        sq = 0
        for v in x:
            sq = sq + v * v
        return sq
    return gauge(f, x)


def gauge_enclosure(f: Norm, x: Sequence, bits: int = 64) -> Enclosure:
    return enclose(gauge(f, x), bits)


def compare_gauges(f: Norm, x: Sequence, y: Sequence, max_precision=DEFAULT_MAX_PRECISION) -> Ordering:
    return compare_certified(gauge_key(f, x), gauge_key(f, y), max_precision)


def _facet_terms(f: Norm, y: Sequence, a: Sequence):
    """(identity, value) per facet of f(y - a); equal identities mean identical values."""
    out = []
    for c, d in f.facets:
        s = 0
        for ci, yi in zip(c, y):
            if ci:
                s = s + yi * ci
        shift = sum((ci * ai for ci, ai in zip(c, a)), Fraction(0))
        s = s - shift
        value = rabs(s / d) if is_exact(s) else abs(s) / d
        out.append(((tuple(ci / d for ci in c), shift / d), value))
    return out


def _top_term(terms, max_precision):
    best = terms[0]
    for t in terms[1:]:
        if t[0] == best[0]:
            continue
        order = compare_certified(t[1], best[1], max_precision)
        if order is Ordering.UNDECIDED:
            raise PrecisionExhausted("cannot order facet values")
        if order is Ordering.GT:
            best = t
    return best


def compare_points(f: Norm, y: Sequence, a: Sequence, b: Sequence, max_precision=DEFAULT_MAX_PRECISION) -> Ordering:
    """Order f(y - a) against f(y - b) for integer a, b.

    Values that agree symbolically (the same maximal facet at the same
    offset, or identical points) come out EQ without numerical refinement,
    so irrational targets in mixed quadratic fields still compare exactly.
    """
    if list(a) == list(b):
        return Ordering.EQ
    if f.kind == "l2":
        # |y-a|^2 - |y-b|^2 = sum (b_i - a_i)(2 y_i - a_i - b_i)
        diff = 0
        for yi, ai, bi in zip(y, a, b):
            if ai != bi:
                diff = diff + (2 * yi - ai - bi) * (bi - ai)
        return compare_certified(diff, Fraction(0), max_precision)
    ta = _top_term(_facet_terms(f, y, a), max_precision)
    tb = _top_term(_facet_terms(f, y, b), max_precision)
    if ta[0] == tb[0]:
        return Ordering.EQ
    return compare_certified(ta[1], tb[1], max_precision)


def nearest_integer_point(f: Norm, y: Sequence, max_precision=DEFAULT_MAX_PRECISION):
    """Integer a minimizing f(y - a), with its gauge value.

    Raises TieAtOptimum if two points provably tie, PrecisionExhausted if the
    minimum cannot be certified.
    """
    f._check_dim(y)
    if f.kind in ("sup", "l2"):
        # separable objective: coordinatewise rounding is optimal; a half-integer
        # coordinate makes rounding up and down tie
        a = []
        for v in y:
            half = v + Fraction(1, 2)
            n = floor_certified(half, max_precision)
            if is_exact(half) and exact_sign(half - n) == 0:
                alt = list(a) + [n - 1]
                raise TieAtOptimum(f"coordinate {v!r} is a half-integer", [alt, list(a) + [n]])
            a.append(n)
        return a, gauge(f, [v - ai for v, ai in zip(y, a)])
    a0 = [floor_certified(v + Fraction(1, 2), max_precision) for v in y]
    g0 = enclose(gauge(f, [v - ai for v, ai in zip(y, a0)]), 32).hi
    radius = g0 * f.sup_extent()
    ranges = []
    for v in y:
        e = enclose(v, 32)
        ranges.append(range(math.ceil(e.lo - radius), math.floor(e.hi + radius) + 1))
    best, ties = None, []
    for cand in itertools.product(*ranges):
        if best is None:
            best, ties = list(cand), []
            continue
        order = compare_points(f, y, cand, best, max_precision)
        if order is Ordering.UNDECIDED:
            raise PrecisionExhausted(f"cannot compare candidates {cand} and {best}")
        if order is Ordering.LT:
            best, ties = list(cand), []
        elif order is Ordering.EQ:
            ties.append(list(cand))
    if ties:
        raise TieAtOptimum(f"{len(ties) + 1} integer points tie at the optimum", [best] + ties)
    return best, gauge(f, [v - ai for v, ai in zip(y, best)])


def illuminates(f: Norm, theta: Sequence, theta_prime: Sequence) -> tuple[bool, Fraction | None]:
    """Whether some lambda > 0 puts theta + lambda*theta_prime in the open unit ball.

    Returns ``(flag, witness_lambda)``. ``theta`` must lie on the unit sphere.
    """
    theta = [Fraction(v) for v in theta]
    theta_prime = [Fraction(v) for v in theta_prime]
    f._check_dim(theta)
    f._check_dim(theta_prime)
    if compare_certified(gauge_key(f, theta), Fraction(1)) is not Ordering.EQ:
        raise NormError(f"theta={theta} is not on the unit sphere of {f}")
    if f.kind == "l2":
        dot = sum(a * b for a, b in zip(theta, theta_prime))
        if dot >= 0:
            return False, None
        return True, -dot / sum(b * b for b in theta_prime)
    lo, hi = Fraction(0), None  # open interval of admissible lambda
    for c, d in f.facets:
        u = sum(ci * ti for ci, ti in zip(c, theta))
        v = sum(ci * ti for ci, ti in zip(c, theta_prime))
        # -d < u + lam v < d
        if v == 0:
            if abs(u) >= d:
                return False, None
            continue
        b1, b2 = (-d - u) / v, (d - u) / v
        left, right = min(b1, b2), max(b1, b2)
        lo = max(lo, left)
        hi = right if hi is None else min(hi, right)
    if hi is not None and hi <= lo:
        return False, None
    return True, (lo + hi) / 2 if hi is not None else lo + 1


def direction(f: Norm, xi: Sequence):
    """Xi = xi / f(xi); exact when f(xi) is exact."""
    g = gauge(f, xi)
    if isinstance(g, Fraction):
        return [v / g for v in xi]
    return [v * _reciprocal(g) for v in xi]


def _reciprocal(g):
    from .exactreal import LazyReal

    lg = LazyReal.of(g)

    def fn(bits):
        k = bits + 8
        while True:
            e = lg.enclosure(k)
            if e.lo > 0:
                out = Enclosure(1 / e.hi, 1 / e.lo)
                if out.width <= Fraction(1, 2**bits) or k > 4 * bits + 256:
                    return out
            k *= 2

    return LazyReal(fn)
