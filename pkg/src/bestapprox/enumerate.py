"""Enumeration of best approximations.

Linear-form sense: integer vectors m = (m_0, ..., m_r) whose value
|m_0 + m_1 a_1 + ... + m_r a_r| is a strict record among all nonzero vectors
of no larger sup-norm.

Simultaneous sense: integer points (p, a) with p >= 1 such that f(p alpha - a)
is strictly smaller than every f(q alpha - b) with q < p, and than every
f(p alpha - b) with b != a.

All decisions are certified. Cheap fixed-point screening (integers scaled by
2**K with explicit error radii) settles almost every comparison; whatever it
cannot settle is re-decided with exact or enclosure arithmetic, and an
undecidable comparison raises PrecisionExhausted.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np


from .exactreal import (
    DEFAULT_MAX_PRECISION,
    Enclosure,
    Ordering,
    PrecisionExhausted,
    compare_certified,
    enclose,
    exact_sign,
    fixed_point,
    floor_certified,
    is_exact,
    rabs,
)
from .intmat import box_points, lll_reduce
from .norms import (
    Norm,
    TieAtOptimum,
    compare_points,
    direction,
    gauge,
    gauge_enclosure,
    gauge_key,
    nearest_integer_point,
)

LINEAR_FORM = "LINEAR_FORM"


class RationalDependence(ArithmeticError):
    """The target satisfies an integer linear relation; ``witness`` is the relation."""

    def __init__(self, msg, witness, partial=None):
        super().__init__(msg)
        self.witness = tuple(witness)
        self.partial = partial


@dataclass(frozen=True)
class LinearFormBA:
    nu: int
    m: tuple[int, ...]
    M: int
    zeta: object  # exact or lazy real

    def zeta_enclosure(self, bits: int = 64) -> Enclosure:
        return enclose(self.zeta, bits)


@dataclass(frozen=True)
class SimultaneousBA:
    nu: int
    p: int
    a: tuple[int, ...]
    D: object
    xi: tuple
    Xi: tuple | None

    def D_enclosure(self, bits: int = 64) -> Enclosure:
        return enclose(self.D, bits)

    @property
    def vector(self) -> tuple[int, ...]:
        return (self.p,) + self.a


@dataclass
class ApproxSequence:
    target: tuple
    norm: object  # Norm or LINEAR_FORM
    entries: list = field(default_factory=list)
    enumeration_bound: int = 0
    exhaustive: bool = True
    final_exact: bool = False  # last entry has zero error (rational target)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def is_linear_form(self) -> bool:
        return self.norm == LINEAR_FORM

    def vectors(self) -> list[tuple[int, ...]]:
        if self.is_linear_form:
            return [e.m for e in self.entries]
        return [e.vector for e in self.entries]

    def same_as(self, other: ApproxSequence) -> bool:
        return self.vectors() == other.vectors() and self.final_exact == other.final_exact


# --- continued fractions --------------------------------------------------


def _cf_exact(x, k: int | None):
    quotients = []
    while k is None or len(quotients) < k:
        a = floor_certified(x)
        quotients.append(a)
        rest = x - a
        if is_exact(rest) and exact_sign(rest) == 0:
            break
        x = 1 / rest
    return quotients


def _cf_of_fraction(x: Fraction, k: int) -> list[int]:
    out = []
    while len(out) < k:
        a = math.floor(x)
        out.append(a)
        if x == a:
            break
        x = 1 / (x - a)
    return out


def cf_quotients(alpha, k: int | None = None, max_precision=DEFAULT_MAX_PRECISION) -> list[int]:
    """Partial quotients [a0; a1, ...]; all of them for rationals when k is None."""
    if is_exact(alpha):
        if k is None and not isinstance(alpha, (int, Fraction)):
            raise ValueError("k is required for irrational alpha")
        return _cf_exact(alpha, k)
    if k is None:
        raise ValueError("k is required for stream input")
    cap = max(1, math.ceil(math.log2(1 / Fraction(max_precision))))
    bits = 32
    while True:
        e = enclose(alpha, bits)
        lo, hi = _cf_of_fraction(e.lo, k + 1), _cf_of_fraction(e.hi, k + 1)
        common = []
        for a, b in zip(lo, hi):
            if a != b:
                break
            common.append(a)
        # the last agreeing quotient of two distinct endpoints may still move
        if len(common) > k:
            return common[:k]
        if bits >= cap:
            raise PrecisionExhausted(f"only {len(common)} partial quotients certified")
        bits = min(cap, bits * 2)


def cf_convergents(alpha, k: int | None = None, max_precision=DEFAULT_MAX_PRECISION) -> list[tuple[int, int]]:
    """First k convergents (p_i, q_i) of alpha's continued fraction."""
    quotients = cf_quotients(alpha, k, max_precision)
    out = []
    p0, q0, p1, q1 = 1, 0, quotients[0], 1
    out.append((p1, q1))
    for a in quotients[1:]:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        out.append((p1, q1))
    return out


# --- simultaneous approximation -------------------------------------------


class _FixedNorm:
    """Fixed-point gauge keys with error radii for one norm."""

    def __init__(self, f: Norm):
        self.f = f
        if f.kind == "poly":
            self.C, self.L = f.integer_facets
            self.csum = [sum(abs(c) for c in row) for row in self.C]

    def key(self, R: Sequence[int], err: int) -> tuple[int, int]:
        kind = self.f.kind
        if kind == "sup":
            hi = max(abs(r) for r in R) + err
            lo = max(max(abs(r) - err, 0) for r in R)
        elif kind == "l2":
            lo = sum(max(abs(r) - err, 0) ** 2 for r in R)
            hi = sum((abs(r) + err) ** 2 for r in R)
        else:
            lo = hi = 0
            for row, cs in zip(self.C, self.csum):
                v = abs(sum(c * r for c, r in zip(row, R)))
                e = err * cs
                hi = max(hi, v + e)
                lo = max(lo, v - e)
        return lo, hi

    def to_sup(self, key_hi: int, one: int) -> Fraction:
        """Upper bound for f in units of the remainder, from a key upper bound."""
        if self.f.kind == "sup":
            return Fraction(key_hi, one)
        if self.f.kind == "l2":
            return Fraction(math.isqrt(key_hi) + 1, one)
        return Fraction(key_hi, one * self.L)


def _nearest_fixed(fx: _FixedNorm, base: list[int], err: int, one: int):
    """Certified nearest integer point from fixed-point data, or None if ambiguous.

    ``base[j]`` approximates p*alpha_j*one within ``err``.
    """
    f = fx.f
    if f.kind in ("sup", "l2"):
        a = []
        for b in base:
            aj = (2 * b + one) // (2 * one)
            r = b - aj * one
            # |r| + err < one/2, strictly
            if 2 * (abs(r) + err) >= one:
                return None
            a.append(aj)
        R = [b - aj * one for b, aj in zip(base, a)]
        return a, R, fx.key(R, err)
    a0 = [(2 * b + one) // (2 * one) for b in base]
    R0 = [b - aj * one for b, aj in zip(base, a0)]
    _, hi0 = fx.key(R0, err)
    radius = fx.to_sup(hi0, one) * f.sup_extent()
    ranges = []
    for b in base:
        lo = Fraction(b - err, one) - radius
        hi = Fraction(b + err, one) + radius
        ranges.append(range(math.ceil(lo), math.floor(hi) + 1))
    cands = []
    for cand in itertools.product(*ranges):
        R = [b - c * one for b, c in zip(base, cand)]
        cands.append((fx.key(R, err), list(cand), R))
    cands.sort(key=lambda t: t[0][1])
    (lo, hi), a, R = cands[0]
    if any(other[0][0] <= hi for other in cands[1:]):
        return None
    return a, R, (lo, hi)


def _exact_remainder(alpha, p, a):
    return [p * x - aj for x, aj in zip(alpha, a)]


def _make_entry(nu, p, a, alpha, f: Norm) -> SimultaneousBA:
    xi = _exact_remainder(alpha, p, a)
    D = gauge(f, xi)
    zero = is_exact(D) and exact_sign(D) == 0
    Xi = None if zero else tuple(direction(f, xi))
    return SimultaneousBA(nu, p, tuple(a), D, tuple(xi), Xi)


def _is_zero_vector(xi) -> bool:
    return all(is_exact(v) and exact_sign(v) == 0 for v in xi)


def _rational_scale(alpha):
    if all(isinstance(x, (int, Fraction)) for x in alpha):
        q = 1
        for x in alpha:
            q = math.lcm(q, Fraction(x).denominator)
        return q, [int(Fraction(x) * q) for x in alpha]
    return None


def best_simultaneous(alpha: Sequence, f: Norm, up_to_p: int, max_precision=DEFAULT_MAX_PRECISION,
                      method: str = "auto", max_entries: int | None = None) -> ApproxSequence:
    """All f-best simultaneous approximations (p, a) with p <= up_to_p.

    method: "auto", "scan" (every p in turn) or "lattice" (rational targets
    only; enumerates lattice points below the current record on doubling
    ranges of p, so huge denominators stay cheap). With max_entries the
    result stops after that many entries and enumeration_bound becomes the
    last denominator.
    """
    seq = _best_simultaneous(alpha, f, up_to_p, max_precision, method, max_entries)
    if max_entries is not None and len(seq.entries) >= max_entries:
        del seq.entries[max_entries:]
        seq.enumeration_bound = seq.entries[-1].p
        seq.final_exact = _is_zero_vector(seq.entries[-1].xi)
    return seq


def _best_simultaneous(alpha, f, up_to_p, max_precision, method, max_entries) -> ApproxSequence:
    alpha = tuple(alpha)
    if len(alpha) != f.dim:
        raise ValueError(f"target of length {len(alpha)} for a norm on R^{f.dim}")
    if up_to_p < 1:
        raise ValueError("up_to_p must be >= 1")
    if method not in ("auto", "scan", "lattice"):
        raise ValueError(f"unknown method {method!r}")
    rat = _rational_scale(alpha)
    if method == "lattice" and rat is None:
        raise ValueError("lattice method needs a rational target")
    if rat is not None and (method == "lattice" or (method == "auto" and up_to_p > _SCAN_LIMIT)):
        return _lattice_rational(alpha, f, up_to_p, rat[0], rat[1], max_precision, max_entries)
    if rat is not None and _numpy_safe(f, rat[0], up_to_p):
        return _scan_rational_numpy(alpha, f, up_to_p, rat[0], rat[1], max_precision)
    if rat is not None:
        one, A, err_per_p = rat[0], rat[1], 0
    else:
        K = 48 + 2 * up_to_p.bit_length()
        one, A, err_per_p = 1 << K, [fixed_point(x, K) for x in alpha], 1
    return _scan_fixed(alpha, f, up_to_p, one, A, err_per_p, max_precision)


_SCAN_LIMIT = 1 << 16


def rational_box_denominators(U: Sequence[int], Q: int, radius, P: int, T: int) -> list[int]:
    """Sorted q in (P, T] having some integer b with |q U_i / Q - b_i| <= radius for all i."""
    n = len(U)
    H = max(1, math.ceil(radius * Q))
    basis = [[H] + [T * u for u in U]]
    for i in range(n):
        basis.append([0] * (i + 1) + [T * Q] + [0] * (n - i - 1))
    qs = set()
    for y in box_points(lll_reduce(basis), [H * T] * (n + 1)):
        q = abs(y[0]) // H
        if P < q <= T and all(abs(v) <= radius * Q * T for v in y[1:]):
            qs.add(q)
    return sorted(qs)


def _lattice_rational(alpha, f, up_to_p, Q, U, max_precision, max_entries=None) -> ApproxSequence:
    """Record search for alpha = U/Q through lattice points of {(q, qU - Qb)}.

    On a range (P, T] every q whose remainder beats the record D satisfies
    |qU_i - Q b_i| <= E D Q, with E the sup-extent of the unit ball; weighting
    the q coordinate by H = ceil(E D Q) and the others by T turns that box into
    a cube. Records are then decided exactly in increasing q.
    """
    seq = ApproxSequence(alpha, f, [], up_to_p, True)
    E = f.sup_extent()
    rec = None

    def consider(q):
        nonlocal rec
        try:
            a, _ = nearest_integer_point(f, [q * x for x in alpha], max_precision)
        except TieAtOptimum as tie:
            _tie_if_record(f, alpha, q, tie, None if rec is None else (None, None, rec), max_precision)
            return False
        xi = _exact_remainder(alpha, q, a)
        if rec is not None:
            order = compare_certified(gauge_key(f, xi), gauge_key(f, rec), max_precision)
            if order is Ordering.UNDECIDED:
                raise PrecisionExhausted(f"cannot compare the remainder at p={q} with the record")
            if order is not Ordering.LT:
                return False
        entry = _make_entry(len(seq.entries) + 1, q, a, alpha, f)
        seq.entries.append(entry)
        rec = list(entry.xi)
        return _is_zero_vector(entry.xi)

    if consider(1):
        seq.final_exact = True
        return seq
    P = 1
    while P < up_to_p:
        T = min(up_to_p, 2 * P)
        D = gauge_enclosure(f, rec, 32).hi
        for q in rational_box_denominators(U, Q, E * D, P, T):
            if consider(q):
                seq.final_exact = True
                return seq
            if max_entries is not None and len(seq.entries) >= max_entries:
                return seq
        P = T
    return seq


def _scan_fixed(alpha, f, up_to_p, one, A, err_per_p, max_precision) -> ApproxSequence:
    fx = _FixedNorm(f)
    seq = ApproxSequence(alpha, f, [], up_to_p, True)
    rec = None  # (key_lo, key_hi, exact remainder)
    for p in range(1, up_to_p + 1):
        err = p * err_per_p
        base = [p * a for a in A]
        got = _nearest_fixed(fx, base, err, one)
        if got is None:
            try:
                a, _ = nearest_integer_point(f, [p * x for x in alpha], max_precision)
            except TieAtOptimum as tie:
                _tie_if_record(f, alpha, p, tie, rec, max_precision)
                continue
            R = [b - aj * one for b, aj in zip(base, a)]
            key = fx.key(R, err)
        else:
            a, R, key = got
        if rec is not None:
            if key[1] < rec[0]:
                better = True
            elif key[0] >= rec[1]:
                better = False
            else:
                xi = _exact_remainder(alpha, p, a)
                order = compare_certified(gauge_key(f, xi), gauge_key(f, rec[2]), max_precision)
                if order is Ordering.UNDECIDED:
                    raise PrecisionExhausted(f"cannot compare the remainder at p={p} with the record")
                better = order is Ordering.LT
            if not better:
                continue
        entry = _make_entry(len(seq.entries) + 1, p, a, alpha, f)
        seq.entries.append(entry)
        rec = (key[0], key[1], list(entry.xi))
        if key[0] == 0 and _is_zero_vector(entry.xi):
            seq.final_exact = True
            break
    return seq


def _tie_if_record(f, alpha, p, tie: TieAtOptimum, rec, max_precision):
    xi = _exact_remainder(alpha, p, tie.points[0])
    if rec is None:
        raise tie
    order = compare_certified(gauge_key(f, xi), gauge_key(f, rec[2]), max_precision)
    if order is Ordering.UNDECIDED:
        raise PrecisionExhausted(f"cannot compare tied optimum at p={p} with the record")
    if order is Ordering.LT:
        raise TieAtOptimum(f"tie at optimum for p={p}: {tie.points}", tie.points)


# vectorized exact scan for rational targets (int64 when it provably fits)

_I64 = 2**62


def _offsets(f: Norm, Q: int):
    """Integer offsets z (in units of Q) covering every possible optimum around centred residues."""
    if f.kind in ("sup", "l2"):
        return None
    R = f.max_over_cube() * f.sup_extent() / 2
    k = math.ceil(R + Fraction(1, 2))
    return np.array(list(itertools.product(range(-k, k + 1), repeat=f.dim)), dtype=np.int64)


def _numpy_safe(f: Norm, Q: int, up_to_p: int) -> bool:
    if up_to_p * Q >= _I64:
        return False
    if f.kind == "sup":
        return True
    if f.kind == "l2":
        return f.dim * Q * Q < _I64
    C, _ = f.integer_facets
    k = _offsets(f, Q)
    span = (int(np.abs(k).max()) + 1) * Q
    return max(sum(abs(c) for c in row) for row in C) * span < _I64


def _block_keys(f: Norm, U: np.ndarray, Q: int, ps: np.ndarray, offs):
    v = (ps[:, None] * U[None, :]) % Q
    v = np.where(2 * v > Q, v - Q, v)  # centred residues in (-Q/2, Q/2]
    if f.kind == "sup":
        key = np.abs(v).max(axis=1)
        tie = (2 * np.abs(v) == Q).any(axis=1)
        return key, tie
    if f.kind == "l2":
        key = (v * v).sum(axis=1)
        tie = (2 * np.abs(v) == Q).any(axis=1)
        return key, tie
    C = np.array(f.integer_facets[0], dtype=np.int64)
    shifted = v[:, None, :] - Q * offs[None, :, :]  # (B, O, n)
    vals = np.abs(np.einsum("bon,fn->bof", shifted, C)).max(axis=2)  # (B, O)
    key = vals.min(axis=1)
    tie = (vals == key[:, None]).sum(axis=1) > 1
    return key, tie


def _scan_rational_numpy(alpha, f, up_to_p, Q, U, max_precision, block: int = 1 << 15) -> ApproxSequence:
    seq = ApproxSequence(alpha, f, [], up_to_p, True)
    Uarr = np.array(U, dtype=np.int64)
    offs = _offsets(f, Q)
    if offs is not None:
        block = max(256, block // len(offs))
    best = None
    start = 1
    while start <= up_to_p:
        stop = min(up_to_p, start + block - 1)
        ps = np.arange(start, stop + 1, dtype=np.int64)
        key, tie = _block_keys(f, Uarr, Q, ps, offs)
        running = np.minimum.accumulate(key)
        prev = np.concatenate(([np.iinfo(np.int64).max if best is None else best], running[:-1]))
        if best is not None:
            prev = np.minimum(prev, best)
        idx = np.nonzero(key < prev)[0]
        for i in idx:
            p = int(ps[i])
            # a flagged tie is re-derived exactly and raises TieAtOptimum
            a, _ = nearest_integer_point(f, [p * x for x in alpha], max_precision)
            entry = _make_entry(len(seq.entries) + 1, p, a, alpha, f)
            seq.entries.append(entry)
            if key[i] == 0:
                seq.final_exact = True
                return seq
        best = int(running[-1]) if best is None else min(best, int(running[-1]))
        start = stop + 1
    return seq


# --- linear forms ---------------------------------------------------------


def _normalize_sign(m):
    for v in m[1:]:
        if v:
            return tuple(m) if v > 0 else tuple(-x for x in m)
    return tuple(m) if m[0] >= 0 else tuple(-x for x in m)


def _shell_tails(r: int, M: int) -> np.ndarray:
    """Rows (m_1..m_r) with max|m_j| == M whose first nonzero entry is positive."""
    blocks = []
    for i in range(r):
        axes = [np.arange(-M + 1, M)] * i + [np.array([M, -M])] + [np.arange(-M, M + 1)] * (r - i - 1)
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, r)
        blocks.append(grid)
    tails = np.concatenate(blocks).astype(np.int64)
    first = tails[np.arange(len(tails)), np.argmax(tails != 0, axis=1)]
    return tails[first > 0]


def _zeta_exact(alpha, m):
    s = m[0]
    for mj, x in zip(m[1:], alpha):
        if mj:
            s = s + x * mj
    return rabs(s)


def _ceil_units(x: Fraction, one: int) -> int:
    return -((-x.numerator * one) // x.denominator)


def best_linear_form(alpha: Sequence, up_to_M: int, max_precision=DEFAULT_MAX_PRECISION,
                     method: str = "lattice", max_entries: int | None = None) -> ApproxSequence:
    """Best approximations of the linear form m_0 + m_1 alpha_1 + ... with max|m_j| <= up_to_M.

    Tails (m_1..m_r) are screened in fixed point: only the nearest m_0 (and,
    while the record exceeds 1/2, its neighbours and the clamped values) can
    give a record, and candidates whose certified lower bound is not below the
    current record are discarded. Survivors are decided exactly, shell by shell.
    Once the record is at most 1/2 (and method is "lattice") the next shell
    holding a vector below the record is found by enumerating a reduced
    lattice over doubling ranges of shells; method="shell" scans every shell.
    With max_entries the scan stops once that many entries are known.
    """
    alpha = tuple(alpha)
    r = len(alpha)
    if r < 1 or up_to_M < 1:
        raise ValueError("need r >= 1 and up_to_M >= 1")
    rat = _rational_scale(alpha)
    if rat is None:
        k_big = 64 + (r + 2) * up_to_M.bit_length()
        a_big = [fixed_point(x, k_big) for x in alpha]
        mag = max(abs(a) for a in a_big) >> k_big
    else:
        mag = max(abs(u) for u in rat[1]) // rat[0]

    def scale(T):
        """Fixed-point data valid for vectors with max|m_j| <= T."""
        if rat is None:
            K = max(8, 61 - (2 * r * T * (mag + 1)).bit_length())
            one = 1 << K
            A = [a >> (k_big - K) for a in a_big]
            err_unit = 2  # fixed_point error plus truncation
        else:
            one, A, err_unit = rat[0], rat[1], 0
        safe = 2 * r * T * (max(abs(a) for a in A) + one) < _I64
        return one, A, err_unit, safe

    if rat is None:
        one_full, A_full, err_full = 1 << k_big, a_big, 1
    else:
        one_full, A_full, err_full = rat[0], rat[1], 0
    seq = ApproxSequence(alpha, LINEAR_FORM, [], up_to_M, True)
    rec = rec_hi = None  # exact record value and a Fraction upper bound for it
    # candidates whose m_0 is the largest coordinate, keyed by |m_0|
    pending: dict[int, list[tuple[int, tuple[int, ...]]]] = {}
    early: list[tuple[int, tuple[int, ...]]] = []

    def decide(M, picks, sc):
        nonlocal rec, rec_hi
        one, A, err_unit, safe = sc
        limit = None if rec_hi is None else _ceil_units(rec_hi, one)
        picks = _screen(picks, A, one, err_unit, limit, safe)
        if not picks:
            return
        cands = {}
        for m0, tail in picks:
            m = (m0,) + tail
            if m not in cands:
                cands[m] = _zeta_exact(alpha, m)
        best, best_val, ties = _exact_min(cands, max_precision)
        if rec is not None:
            order = compare_certified(best_val, rec, max_precision)
            if order is Ordering.UNDECIDED:
                raise PrecisionExhausted(f"cannot compare shell M={M} minimum with the record")
            if order is not Ordering.LT:
                return
        if is_exact(best_val) and exact_sign(best_val) == 0:
            raise RationalDependence(f"integer relation {best}", _normalize_sign(best), seq)
        rec = best_val
        rec_hi = enclose(rec, 64 + 2 * M.bit_length()).hi if not isinstance(rec, Fraction) else rec
        # tied minimizers beat the old record but not each other: none enters
        if not ties:
            seq.entries.append(LinearFormBA(len(seq.entries) + 1, _normalize_sign(best), M, best_val))

    M = 1
    while M <= up_to_M:
        if max_entries is not None and len(seq.entries) >= max_entries:
            seq.enumeration_bound = seq.entries[-1].M
            break
        if method == "shell" or rec_hi is None or rec_hi > Fraction(1, 2):
            sc = scale(M)
            one, A, err_unit, safe = sc
            tails = _shell_tails(r, M)
            if not safe:
                tails = tails.astype(object)
            S = tails @ np.array(A, dtype=np.int64 if safe else object)
            c = -((2 * S + one) // (2 * one))
            err = err_unit * np.abs(tails).sum(axis=1)
            limit = None if rec_hi is None else _ceil_units(rec_hi, one)
            picks: list[tuple[int, tuple[int, ...]]] = []
            for d in (0, -1, 1):
                m0 = np.clip(c, -M, M) + d
                v = np.abs(m0 * one + S)
                keep = np.abs(m0) <= M
                if d:
                    v0 = np.abs(np.clip(c, -M, M) * one + S)
                    keep &= v <= v0 + 2 * err
                if limit is not None:
                    keep &= v - err < limit
                for i in np.nonzero(keep)[0]:
                    picks.append((int(m0[i]), tuple(int(t) for t in tails[i])))
            for i in np.nonzero(np.abs(c) > M)[0]:
                item = (int(c[i]), tuple(int(t) for t in tails[i]))
                pending.setdefault(abs(item[0]), []).append(item)
                early.append(item)
            picks.extend(pending.pop(M, []))
            # below |m_0| the clamped value is >= 1/2, so these only matter early on
            early = [t for t in early if abs(t[0]) > M]
            picks.extend(((M if cc > 0 else -M), tail) for cc, tail in early)
            if M == 1:
                picks.append((1, (0,) * r))
            if picks:
                decide(M, picks, sc)
            M += 1
            continue
        # record <= 1/2: find the next shell holding a vector below the record
        early = []
        T = min(up_to_M, 2 * M)
        found = _lattice_candidates(A_full, one_full, err_full, rec_hi, M - 1, T)
        if not found:
            M = T + 1
            continue
        for MM in sorted(found):
            before = rec
            decide(MM, found[MM], scale(MM))
            if rec is not before:
                M = MM + 1
                break
        else:
            M = T + 1
    return seq


def _lattice_candidates(A, one, err_unit, rec_hi, M, T):
    """Sign-normalised vectors with M < max|m_j| <= T that may lie below rec_hi, by shell.

    The lattice of (L m_1, ..., L m_r, T (m_0 one + m.A)) meets the cube of
    half-width L T exactly in the integer vectors with |m_j| <= T and
    |m_0 one + m.A| <= L; L covers the record plus the fixed-point error.
    """
    r = len(A)
    L = _ceil_units(rec_hi, one) + err_unit * r * T
    basis = [[0] * r + [T * one]]
    for j in range(r):
        basis.append([L * int(j == i) for i in range(r)] + [T * A[j]])
    pts = box_points(lll_reduce(basis), [L * T] * (r + 1))
    found: dict[int, list] = {}
    seen = set()
    for y in pts:
        tail = tuple(v // L for v in y[:r])
        s = y[r] // T - sum(m * a for m, a in zip(tail, A))
        m0 = s // one
        m = _normalize_sign((m0,) + tail)
        size = max(abs(v) for v in m)
        if M < size <= T and m not in seen:
            seen.add(m)
            found.setdefault(size, []).append((m[0], m[1:]))
    return found


def _screen(picks, A, one, err_unit, limit, safe):
    """Drop candidates whose fixed-point lower bound exceeds the best upper bound or the record."""
    dt = np.int64 if safe else object
    m0 = np.array([p[0] for p in picks], dtype=dt)
    tails = np.array([p[1] for p in picks], dtype=dt).reshape(len(picks), -1)
    v = np.abs(m0 * one + tails @ np.array(A, dtype=dt))
    err = err_unit * np.abs(tails).sum(axis=1)
    lo, hi = v - err, v + err
    keep = lo <= hi.min()
    if limit is not None:
        keep &= lo < limit
    return [picks[i] for i in np.nonzero(keep)[0]]


def _exact_min(cands: dict, max_precision):
    items = iter(cands.items())
    best, best_val = next(items)
    ties = []
    for m, val in items:
        order = compare_certified(val, best_val, max_precision)
        if order is Ordering.UNDECIDED:
            raise PrecisionExhausted(f"cannot separate {m} from {best}")
        if order is Ordering.LT:
            best, best_val, ties = m, val, []
        elif order is Ordering.EQ:
            ties.append(m)
    return best, best_val, ties


# --- brute-force oracles ---------------------------------------------------


def _shell(k: int, M: int):
    """Every integer vector of length k with max|m_j| == M, each exactly once."""
    for i in range(k):
        head = [range(-M + 1, M)] * i
        tail = [range(-M, M + 1)] * (k - i - 1)
        for m in itertools.product(*head, (-M, M), *tail):
            yield m


def _int_key(f: Norm, v: Sequence[int]):
    """Integer image of f(v), monotone in f, for integer v."""
    if f.kind == "sup":
        return max(abs(x) for x in v)
    if f.kind == "l2":
        return sum(x * x for x in v)
    return max(abs(sum(c * x for c, x in zip(row, v))) for row in f.integer_facets[0])


def brute_force_oracle_lf(alpha: Sequence, up_to_M: int, max_precision=DEFAULT_MAX_PRECISION) -> ApproxSequence:
    """Definitional scan over every vector of each sup-norm shell, exact comparisons only.

    Rational targets are compared through the integers Q |m_0 + m . alpha|.
    """
    alpha = tuple(alpha)
    r = len(alpha)
    rat = _rational_scale(alpha)
    seq = ApproxSequence(alpha, LINEAR_FORM, [], up_to_M, True)
    rec = None
    for M in range(1, up_to_M + 1):
        best, best_val, ties = None, None, []
        for m in _shell(r + 1, M):
            if _normalize_sign(m) != m:
                continue
            if rat is not None:
                val = abs(m[0] * rat[0] + sum(mi * u for mi, u in zip(m[1:], rat[1])))
                order = None if best is None else (Ordering.LT if val < best_val else
                                                   Ordering.EQ if val == best_val else Ordering.GT)
            else:
                val = _zeta_exact(alpha, m)
                order = None if best is None else compare_certified(val, best_val, max_precision)
            if best is None:
                best, best_val = m, val
                continue
            if order is Ordering.UNDECIDED:
                raise PrecisionExhausted(f"oracle cannot compare {m} and {best}")
            if order is Ordering.LT:
                best, best_val, ties = m, val, []
            elif order is Ordering.EQ:
                ties.append(m)
        if rec is not None:
            order = compare_certified(best_val, rec, max_precision)
            if order is Ordering.UNDECIDED:
                raise PrecisionExhausted("oracle cannot compare with record")
            if order is not Ordering.LT:
                continue
        if is_exact(best_val) and exact_sign(best_val) == 0:
            raise RationalDependence(f"integer relation {best}", best, seq)
        rec = best_val
        if not ties:
            zeta = Fraction(best_val, rat[0]) if rat is not None else best_val
            seq.entries.append(LinearFormBA(len(seq.entries) + 1, best, M, zeta))
    return seq


def brute_force_oracle_sim(alpha: Sequence, f: Norm, up_to_p: int, max_precision=DEFAULT_MAX_PRECISION) -> ApproxSequence:
    """Definitional scan over every p and every integer point in a provably sufficient box.

    Rational targets U/Q are compared through integer keys of p U - Q b.
    """
    alpha = tuple(alpha)
    seq = ApproxSequence(alpha, f, [], up_to_p, True)
    # any minimizer b satisfies |p alpha - b|_inf <= E * f(rounding remainder) <= E * r_f / 2
    reach = math.ceil(f.sup_extent() * Fraction(math.ceil(enclose(f.max_over_cube(), 16).hi * 2), 2)) + 1
    rat = _rational_scale(alpha)
    rec = None
    for p in range(1, up_to_p + 1):
        pa = [p * x for x in alpha]
        boxes = [range(floor_certified(v) - reach, floor_certified(v) + reach + 2) for v in pa]
        best, best_key, ties = None, None, []
        for b in itertools.product(*boxes):
            if rat is not None:
                key = _int_key(f, [p * u - rat[0] * bj for u, bj in zip(rat[1], b)])
                order = None if best is None else (Ordering.LT if key < best_key else
                                                   Ordering.EQ if key == best_key else Ordering.GT)
            else:
                key = None
                order = None if best is None else compare_points(f, pa, b, best, max_precision)
            if best is None:
                best, best_key = b, key
                continue
            if order is Ordering.UNDECIDED:
                raise PrecisionExhausted(f"oracle cannot compare at p={p}")
            if order is Ordering.LT:
                best, best_key, ties = b, key, []
            elif order is Ordering.EQ:
                ties.append(b)
        if rat is None:
            best_key = gauge_key(f, [v - bj for v, bj in zip(pa, best)])
        if rec is not None:
            order = compare_certified(best_key, rec, max_precision)
            if order is Ordering.UNDECIDED:
                raise PrecisionExhausted(f"oracle cannot compare p={p} with record")
            if order is not Ordering.LT:
                continue
        if ties:
            raise TieAtOptimum(f"tie at optimum for p={p}", [list(best)] + [list(t) for t in ties])
        entry = _make_entry(len(seq.entries) + 1, p, list(best), alpha, f)
        seq.entries.append(entry)
        rec = best_key
        if _is_zero_vector(entry.xi):
            seq.final_exact = True
            break
    return seq
