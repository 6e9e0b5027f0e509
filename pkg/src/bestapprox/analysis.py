"""Structural diagnostics of best-approximation sequences.

Everything here is a finite-horizon observation: determinants and ranks of
windows, the rank of a tail, remainder signatures, the no-interior and
separation properties of consecutive directions, growth and doubling of the
denominators, and greedy clusters of the directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .enumerate import ApproxSequence
from .exactreal import (
    DEFAULT_MAX_PRECISION,
    Enclosure,
    Ordering,
    PrecisionExhausted,
    compare_certified,
    enclose,
    format_scalar,
    sign_or_raise,
)
from .intmat import det, rank
from .norms import Norm, gauge, gauge_key


class WindowError(IndexError):
    pass


def _rows(seq: ApproxSequence) -> list[tuple[int, ...]]:
    return seq.vectors()


def window_matrix(seq: ApproxSequence, nu: int, s: int) -> list[tuple[int, ...]]:
    """Rows of entries nu..nu+s (1-based), i.e. s+1 consecutive best approximations."""
    rows = _rows(seq)
    if nu < 1 or s < 0 or nu + s > len(rows):
        raise WindowError(f"window {nu}..{nu + s} outside 1..{len(rows)}")
    return rows[nu - 1:nu + s]


def delta_det(seq: ApproxSequence, nu: int) -> int:
    """Determinant of the square window starting at entry nu."""
    width = len(_rows(seq)[0]) if len(seq) else 0
    return det(window_matrix(seq, nu, width - 1))


def window_rank(seq: ApproxSequence, nu: int, s: int) -> int:
    return rank(window_matrix(seq, nu, s))


def tail_lattice_dim(seq: ApproxSequence, from_nu: int = 1) -> int:
    """Rank of the stack of entries with index >= from_nu.

    This is what the computed horizon shows, not a statement about the
    infinite tail.
    """
    rows = _rows(seq)[from_nu - 1:]
    if not rows:
        raise WindowError("empty tail")
    return rank(rows)


# --- signatures -------------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    signs: tuple[int, ...]  # entries in {-1, 0, 1}

    @property
    def has_zero(self) -> bool:
        return 0 in self.signs

    def __str__(self):
        return "(" + ",".join("+" if s > 0 else "-" if s < 0 else "0" for s in self.signs) + ")"


def signature(xi: Sequence, max_precision=DEFAULT_MAX_PRECISION) -> Signature:
    return Signature(tuple(sign_or_raise(x, max_precision) for x in xi))


def signature_sequence(seq: ApproxSequence, max_precision=DEFAULT_MAX_PRECISION) -> list[Signature]:
    _need_simultaneous(seq)
    return [signature(e.xi, max_precision) for e in seq.entries]


def rogers_check(seq: ApproxSequence, max_precision=DEFAULT_MAX_PRECISION) -> list[bool | None]:
    """For each consecutive pair: True if the signatures differ, None if either has a zero."""
    sig = signature_sequence(seq, max_precision)
    out = []
    for s, t in zip(sig, sig[1:]):
        out.append(None if s.has_zero or t.has_zero else s != t)
    return out


def _need_simultaneous(seq: ApproxSequence):
    if seq.is_linear_form:
        raise TypeError("needs a simultaneous-approximation sequence")


def _nonzero_entries(seq: ApproxSequence):
    return [e for e in seq.entries if e.Xi is not None]


# --- direction geometry ------------------------------------------------------


def _diff(u, v):
    return [a - b for a, b in zip(u, v)]


def _gauge_vs(f: Norm, x, bound, max_precision) -> Ordering:
    """Compare f(x) with a nonnegative bound, squaring for the Euclidean norm."""
    if f.kind == "l2":
        return compare_certified(gauge_key(f, x), bound * bound, max_precision)
    return compare_certified(gauge(f, x), bound, max_precision)


def no_interior_check(seq: ApproxSequence, f: Norm, normalized: bool = False,
                      max_precision=DEFAULT_MAX_PRECISION) -> list[bool]:
    """For each nu: f(xi_{nu+1} - xi_nu) >= f(xi_nu), or with normalized=True
    f(Xi_{nu+1} - Xi_nu) >= 1.

    A final zero remainder ends the list (it has no direction).
    """
    _need_simultaneous(seq)
    ents = _nonzero_entries(seq)
    out = []
    for e, g in zip(ents, ents[1:]):
        if normalized:
            order = _gauge_vs(f, _diff(g.Xi, e.Xi), Fraction(1), max_precision)
        else:
            order = compare_certified(gauge_key(f, _diff(g.xi, e.xi)), gauge_key(f, e.xi), max_precision)
        if order is Ordering.UNDECIDED:
            raise PrecisionExhausted(f"no-interior comparison undecided at nu={e.nu}")
        out.append(order is not Ordering.LT)
    return out


def separation_scan(seq: ApproxSequence, f: Norm, delta, max_precision=DEFAULT_MAX_PRECISION) -> list[int]:
    """Indices j with f(Xi_{j+1} - Xi_j) > 1 + delta (Xi_{j+1} outside the closed ball)."""
    _need_simultaneous(seq)
    delta = Fraction(delta)
    if delta < 0:
        raise ValueError("delta must be >= 0")
    ents = _nonzero_entries(seq)
    out = []
    for e, g in zip(ents, ents[1:]):
        order = _gauge_vs(f, _diff(g.Xi, e.Xi), 1 + delta, max_precision)
        if order is Ordering.UNDECIDED:
            raise PrecisionExhausted(f"separation comparison undecided at nu={e.nu}")
        if order is Ordering.GT or (delta == 0 and order is Ordering.EQ):
            out.append(e.nu)
    return out


# --- growth ------------------------------------------------------------------


def _iroot(x: int, n: int) -> int:
    """floor(x ** (1/n)) for x >= 0."""
    if x < 2:
        return x
    lo, hi = 1, 1 << (x.bit_length() // n + 1)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid ** n <= x:
            lo = mid
        else:
            hi = mid - 1
    return lo


def root_enclosure(x: Fraction, n: int, bits: int = 64) -> Enclosure:
    """Enclosure of x^(1/n) for rational x >= 0."""
    x = Fraction(x)
    scaled = x * (1 << (n * bits))
    k = _iroot(scaled.numerator // scaled.denominator, n)
    exact = Fraction(k) ** n == scaled
    return Enclosure(Fraction(k, 1 << bits), Fraction(k if exact else k + 1, 1 << bits))


@dataclass
class GrowthReport:
    h: int
    series: list[tuple[int, Enclosure]]  # (nu, f(xi_nu) * p_{nu+1})
    doubling: list[tuple[int, bool]]  # (nu, p_{nu+h} >= 2 p_nu)
    badness: Enclosure | None  # inf over nu of p_nu^(1/n) f(xi_nu)
    badness_at: int | None

    @property
    def doubling_ok(self) -> bool:
        return all(ok for _, ok in self.doubling)


def growth_and_doubling(seq: ApproxSequence, f: Norm, bits: int = 64) -> GrowthReport:
    _need_simultaneous(seq)
    n = len(seq.target)
    h = 2 ** (n + 1)
    ents = seq.entries
    series = []
    for e, g in zip(ents, ents[1:]):
        if e.Xi is None:
            break
        series.append((e.nu, enclose(e.D, bits).scale(g.p)))
    doubling = [(ents[i].nu, ents[i + h].p >= 2 * ents[i].p) for i in range(len(ents) - h)]
    best = best_nu = None
    for e in _nonzero_entries(seq):
        v = enclose(e.D, bits) * root_enclosure(Fraction(e.p), n, bits)
        if best is None or v.hi < best.hi:
            best, best_nu = v, e.nu
    return GrowthReport(h, series, doubling, best, best_nu)


# --- Minkowski-type bounds -----------------------------------------------------


def c1_constant(f: Norm, bits: int = 64) -> Enclosure:
    """Enclosure of 2 / Vol(unit ball)^(1/n)."""
    vol = f.volume()
    lo = root_enclosure(vol.lo, f.dim, bits).lo
    hi = root_enclosure(vol.hi, f.dim, bits).hi
    return Enclosure(2 / hi, 2 / lo)


def minkowski_check_lf(seq: ApproxSequence, max_precision=DEFAULT_MAX_PRECISION) -> list[bool]:
    """zeta_nu * M_{nu+1}^r <= 1 for each consecutive pair."""
    if not seq.is_linear_form:
        raise TypeError("needs a linear-form sequence")
    r = len(seq.target)
    out = []
    for e, g in zip(seq.entries, seq.entries[1:]):
        order = compare_certified(e.zeta * g.M ** r, Fraction(1), max_precision)
        if order is Ordering.UNDECIDED:
            raise PrecisionExhausted(f"Minkowski comparison undecided at nu={e.nu}")
        out.append(order is not Ordering.GT)
    return out


def _power(x, k: int):
    out = x if k else Fraction(1)
    for _ in range(k - 1):
        out = out * x
    return out


def minkowski_check_sim(seq: ApproxSequence, f: Norm, max_precision=DEFAULT_MAX_PRECISION) -> list[bool]:
    """f(xi_nu) <= C1(f) p_{nu+1}^(-1/n), checked as f(xi_nu)^n p_{nu+1} Vol <= 2^n.

    The upper end of the volume enclosure is used, so a True is certified;
    for polytope norms the volume is exact.
    """
    _need_simultaneous(seq)
    n = f.dim
    vol = f.volume().hi
    out = []
    for e, g in zip(seq.entries, seq.entries[1:]):
        if f.kind == "l2":
            # f^n from the exact square f^2 where possible
            lhs = _power(gauge_key(f, e.xi), n // 2)
            if n % 2:
                lhs = lhs * e.D
        else:
            lhs = _power(e.D, n)
        order = compare_certified(lhs * (g.p * vol), Fraction(2 ** n), max_precision)
        if order is Ordering.UNDECIDED:
            raise PrecisionExhausted(f"Minkowski comparison undecided at nu={e.nu}")
        out.append(order is not Ordering.GT)
    return out


# --- asymptotic directions -------------------------------------------------------


@dataclass
class Cluster:
    representative: tuple
    members: list[int] = field(default_factory=list)
    radius: Fraction = Fraction(0)


@dataclass
class AsymptoticSet:
    clusters: list[Cluster]
    burn_in: int


def asymptotic_directions(seq: ApproxSequence, f: Norm, eps, burn_in: int = 1,
                          max_precision=DEFAULT_MAX_PRECISION) -> AsymptoticSet:
    """Greedy clustering of the directions Xi_nu, nu >= burn_in, in index order.

    A point joins the first cluster whose representative is within gauge
    distance eps; a comparison that cannot be settled counts as within.
    """
    _need_simultaneous(seq)
    eps = Fraction(eps)
    clusters: list[Cluster] = []
    for e in _nonzero_entries(seq):
        if e.nu < burn_in:
            continue
        for c in clusters:
            if _gauge_vs(f, _diff(e.Xi, c.representative), eps, max_precision) is not Ordering.GT:
                c.members.append(e.nu)
                break
        else:
            clusters.append(Cluster(e.Xi, [e.nu], eps))
    if not clusters:
        raise WindowError("no directions after burn-in")
    return AsymptoticSet(clusters, burn_in)


# --- report ----------------------------------------------------------------


def _enc_json(x: Enclosure | None):
    return None if x is None else {"lo": format_scalar(x.lo), "hi": format_scalar(x.hi)}


def _float_pair(v, bits=53):
    return [float(enclose(c, bits).mid) for c in v]


def analyze(seq: ApproxSequence, f: Norm | None = None, delta=Fraction(1, 100), eps=Fraction(1, 10),
            burn_in: int = 1, max_precision=DEFAULT_MAX_PRECISION) -> dict:
    """All applicable checks on one sequence, as a JSON-ready dict."""
    out: dict = {"entries": len(seq), "enumeration_bound": seq.enumeration_bound}
    rows = seq.vectors()
    if not rows:
        return out
    width = len(rows[0])
    dets = []
    for nu in range(1, len(rows) - width + 2):
        dets.append({"nu": nu, "det": delta_det(seq, nu)})
    out["determinants"] = dets
    out["tail_rank"] = tail_lattice_dim(seq, 1)
    if seq.is_linear_form:
        out["minkowski"] = minkowski_check_lf(seq, max_precision)
        return out
    if f is None:
        f = seq.norm
    sig = signature_sequence(seq, max_precision)
    out["signatures"] = [str(s) for s in sig]
    out["rogers"] = rogers_check(seq, max_precision)
    out["no_interior"] = no_interior_check(seq, f, max_precision=max_precision)
    out["separation"] = separation_scan(seq, f, delta, max_precision)
    out["minkowski"] = minkowski_check_sim(seq, f, max_precision)
    g = growth_and_doubling(seq, f)
    out["growth"] = [{"nu": nu, "value": _enc_json(v)} for nu, v in g.series]
    out["doubling"] = {"h": g.h, "ok": g.doubling_ok, "checks": [{"nu": nu, "ok": ok} for nu, ok in g.doubling]}
    out["badness"] = {"value": _enc_json(g.badness), "nu": g.badness_at}
    try:
        ast = asymptotic_directions(seq, f, eps, burn_in, max_precision)
        out["clusters"] = [{"representative": _float_pair(c.representative), "members": c.members,
                            "radius": format_scalar(c.radius)} for c in ast.clusters]
    except WindowError:
        out["clusters"] = []
    return out


def directions_svg(seq: ApproxSequence, f: Norm, size: int = 400) -> str:
    """SVG scatter of the directions Xi_nu over the unit-ball boundary (2-D only)."""
    if f.dim != 2:
        raise ValueError("SVG scatter needs a 2-D target")
    pts = [_float_pair(e.Xi) for e in _nonzero_entries(seq)]
    if f.is_polytope:
        outline = [(float(x), float(y)) for x, y in f.boundary_polygon()]
    else:
        outline = [(math.cos(t * math.pi / 90), math.sin(t * math.pi / 90)) for t in range(180)]
    ext = max([abs(c) for p in outline for c in p] + [abs(c) for p in pts for c in p] + [1.0]) * 1.1
    s = size / (2 * ext)

    def xy(p):
        return f"{size / 2 + p[0] * s:.2f},{size / 2 - p[1] * s:.2f}"

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
             f'<polygon points="{" ".join(xy(p) for p in outline)}" fill="none" stroke="gray"/>']
    for i, p in enumerate(pts):
        c = xy(p).split(",")
        parts.append(f'<circle cx="{c[0]}" cy="{c[1]}" r="3" fill="blue"><title>{i + 1}</title></circle>')
        parts.append(f'<text x="{float(c[0]) + 4:.2f}" y="{float(c[1]) - 4:.2f}" font-size="10">{i + 1}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
