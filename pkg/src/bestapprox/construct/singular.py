"""Nested-interval construction of psi-singular vectors, with exact certificates.

Level nu stores a denominator p_nu, numerators a_{j,nu} and intervals
Delta_{j,nu} = [a/p + sigma_{j,nu} psi(p)/p, a/p + (sigma_{j,nu}+1) psi(p)/p]
(narrowed to rational endpoints using a psi enclosure). Every alpha in the
final box therefore satisfies

    sigma_{j,nu} psi(p_nu) <= p_nu alpha_j - a_{j,nu} <= (sigma_{j,nu}+1) psi(p_nu)

at every level. The next denominator is floor(6 p / psi(p)) + 1, which puts
a fraction a/p_{nu+1} into each sixth-subdivision window of Delta_{j,nu}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..enumerate import RationalDependence, best_linear_form
from ..exactreal import Enclosure, format_scalar, parse_scalar
from ..intmat import det
from .psi import PsiFunction, SingularSchedule, enc_json, interval_det, sigma_calibrate


class AdmissibilityFailure(ArithmeticError):
    """psi does not decay fast enough for the schedule."""


class DepthOverflow(ArithmeticError):
    """Denominators or psi values exceed the size cap."""


class HorizonError(ValueError):
    pass


@dataclass
class Level:
    nu: int
    p: int
    a: list[int]
    intervals: list[tuple[Fraction, Fraction]]
    psi: Enclosure  # enclosure of psi(p)
    window: list[int] = field(default_factory=list)  # subdivision choice per coordinate


@dataclass
class SingularCertificate:
    r: int
    psi: PsiFunction
    schedule: SingularSchedule
    levels: list[Level]
    lambda_bits: list[list[int]]
    bits: int = 64

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def box(self) -> list[tuple[Fraction, Fraction]]:
        return self.levels[-1].intervals

    def midpoint(self) -> list[Fraction]:
        return [(lo + hi) / 2 for lo, hi in self.box]

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "psi": self.psi.describe(),
            "sigma": format_scalar(self.schedule.sigma),
            "levels": [
                {"nu": lv.nu, "p": lv.p, "a": list(lv.a),
                 "intervals": [[format_scalar(lo), format_scalar(hi)] for lo, hi in lv.intervals],
                 "psi": enc_json(lv.psi), "window": list(lv.window)}
                for lv in self.levels
            ],
            "lambda_bits": [list(b) for b in self.lambda_bits],
        }

    @classmethod
    def from_json(cls, data: dict) -> SingularCertificate:
        r = data["r"]
        psi = PsiFunction.parse(data["psi"])
        sched = SingularSchedule(r, parse_scalar(data["sigma"]))
        levels = []
        for lv in data["levels"]:
            ivs = [(parse_scalar(lo), parse_scalar(hi)) for lo, hi in lv["intervals"]]
            pe = Enclosure(parse_scalar(lv["psi"][0]), parse_scalar(lv["psi"][1]))
            levels.append(Level(lv["nu"], lv["p"], list(lv["a"]), ivs, pe, list(lv.get("window", []))))
        return cls(r, psi, sched, levels, [list(b) for b in data.get("lambda_bits", [])])

    def validate(self, bits: int | None = None) -> ValidationReport:
        return validate_certificate(self, bits)


def _delta(a: int, p: int, s: Fraction, pe: Enclosure) -> tuple[Fraction, Fraction]:
    return (Fraction(a, p) + s * pe.hi / p, Fraction(a, p) + (s + 1) * pe.lo / p)


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def singular_build(r: int, psi: PsiFunction, schedule: SingularSchedule | None = None,
                   lambda_bits: Sequence[Sequence[int]] | None = None, depth: int = 3, p0: int = 2,
                   a0: Sequence[int] | None = None, bits: int = 64, max_bits: int = 1 << 16) -> SingularCertificate:
    """Run `depth` levels (nu = 0..depth-1) of the nested construction.

    lambda_bits[nu][j-2] picks the window (0: sixths 1-2, 1: sixths 4-5) of
    coordinate j >= 2 at step nu -> nu+1; coordinate 1 always uses window 0.
    Missing bits default to 1 so that the coordinates separate.
    """
    if schedule is None:
        schedule = SingularSchedule(r, sigma_calibrate(r))
    if schedule.r != r:
        raise ValueError("schedule dimension differs from r")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    lambda_bits = [list(b) for b in (lambda_bits or [])]
    W = schedule.W
    pe = psi.enclosure(p0, bits)
    if a0 is None:
        # shift the level-0 intervals next to [0, 1)
        a0 = [-p0 * math.floor(schedule.value(j, 0) * pe.hi / p0) for j in range(1, r + 1)]
    levels = [Level(0, p0, list(a0), [_delta(a0[j - 1], p0, schedule.value(j, 0), pe) for j in range(1, r + 1)], pe)]
    used_bits = []
    for nu in range(depth - 1):
        lv = levels[-1]
        p, pe = lv.p, lv.psi
        p_next = math.floor(6 * p / pe.lo) + 1
        if p_next.bit_length() > max_bits:
            raise DepthOverflow(f"p_{nu + 1} has {p_next.bit_length()} bits")
        pe_next = psi.enclosure(p_next, bits)
        if pe_next.hi.denominator.bit_length() > max_bits:
            raise DepthOverflow(f"psi(p_{nu + 1}) needs more than {max_bits} bits")
        if not W * pe_next.hi < pe.lo:
            raise AdmissibilityFailure(f"W psi(p_{nu + 1}) >= psi(p_{nu}): psi decays too slowly")
        bits_nu = lambda_bits[nu] if nu < len(lambda_bits) else [1] * (r - 1)
        used_bits.append(list(bits_nu))
        a_next, ivs, win = [], [], []
        for j in range(1, r + 1):
            tau = 0 if j == 1 else bits_nu[j - 2]
            s = schedule.value(j, nu)
            k0, k1 = (1, 2) if tau == 0 else (4, 5)
            lo = Fraction(lv.a[j - 1], p) + (s + Fraction(k0, 6)) * pe.hi / p
            hi = Fraction(lv.a[j - 1], p) + (s + Fraction(k1, 6)) * pe.lo / p
            a = _ceil(lo * p_next)
            if Fraction(a, p_next) > hi:
                raise AdmissibilityFailure(f"no a/p_{nu + 1} in window {tau} of coordinate {j}")
            a_next.append(a)
            win.append(tau)
            iv = _delta(a, p_next, schedule.value(j, nu + 1), pe_next)
            if not (lv.intervals[j - 1][0] <= iv[0] < iv[1] <= lv.intervals[j - 1][1]):
                raise AdmissibilityFailure(f"Delta_{j},{nu + 1} not nested in Delta_{j},{nu}")
            ivs.append(iv)
        lv.window = win
        levels.append(Level(nu + 1, p_next, a_next, ivs, pe_next))
    return SingularCertificate(r, psi, schedule, levels, used_bits, bits)


# --- independent validation ------------------------------------------------------


@dataclass
class ValidationReport:
    checks: list[tuple[str, bool]]
    step_ratios: list[Enclosure]  # p_{nu+1} psi(p_nu) / p_nu

    @property
    def ok(self) -> bool:
        return all(ok for _, ok in self.checks)

    def failures(self) -> list[str]:
        return [name for name, ok in self.checks if not ok]


def validate_certificate(cert: SingularCertificate, bits: int | None = None) -> ValidationReport:
    """Re-derive every stored inequality from the raw endpoints with a fresh psi enclosure."""
    bits = (bits or cert.bits) + 32
    sched, r = cert.schedule, cert.r
    checks: list[tuple[str, bool]] = []
    ratios = []
    box = cert.box
    psis = [cert.psi.enclosure(lv.p, bits) for lv in cert.levels]
    for lv, pe in zip(cert.levels, psis):
        checks.append((f"psi enclosure consistent at nu={lv.nu}", lv.psi.lo <= pe.hi and pe.lo <= lv.psi.hi))
        for j in range(1, r + 1):
            lo, hi = lv.intervals[j - 1]
            s = sched.value(j, lv.nu)
            a = lv.a[j - 1]
            checks.append((f"(i) lower j={j} nu={lv.nu}", lv.p * lo - a >= s * pe.hi))
            checks.append((f"(i) upper j={j} nu={lv.nu}", lv.p * hi - a <= (s + 1) * pe.lo))
            blo, bhi = box[j - 1]
            checks.append((f"box inside Delta j={j} nu={lv.nu}", lo <= blo <= bhi <= hi))
    for k in range(len(cert.levels) - 1):
        lv, nx = cert.levels[k], cert.levels[k + 1]
        pe, pn = psis[k], psis[k + 1]
        lo_rule, hi_rule = math.floor(6 * lv.p / pe.hi) + 1, math.floor(6 * lv.p / pe.lo) + 1
        checks.append((f"step rule nu={lv.nu}", lo_rule <= nx.p <= hi_rule))
        ratio = Enclosure(nx.p * pe.lo / lv.p, nx.p * pe.hi / lv.p)
        ratios.append(ratio)
        checks.append((f"(ii) 6 <= p_next psi(p)/p < 7 at nu={lv.nu}", ratio.hi >= 6 and ratio.lo < 7
                       and nx.p * pe.hi >= 6 * lv.p))
        checks.append((f"admissible W psi(p_next) < psi(p) at nu={lv.nu}", sched.W * pn.hi < pe.lo))
        for j in range(1, r + 1):
            lo, hi = lv.intervals[j - 1]
            nlo, nhi = nx.intervals[j - 1]
            checks.append((f"nesting j={j} nu={lv.nu}", lo <= nlo < nhi <= hi))
            x = Fraction(lv.a[j - 1], lv.p)
            checks.append((f"distinct j={j} nu={lv.nu}", not (nlo <= x <= nhi)))
    return ValidationReport(checks, ratios)


# --- linear-form witnesses --------------------------------------------------------


def cofactor_vector(rows: Sequence[Sequence[int]]) -> list[int]:
    """Integer n with n . (1, alpha) = det([[1, alpha], rows]) for r rows of length r+1."""
    r = len(rows)
    out = []
    for k in range(r + 1):
        minor = [list(row[:k]) + list(row[k + 1:]) for row in rows]
        out.append((-1) ** k * det(minor))
    return out


def linear_form_enclosure(n: Sequence[int], box: Sequence[tuple[Fraction, Fraction]]) -> Enclosure:
    """Exact range of n_0 + sum n_j alpha_j over the box."""
    lo = hi = Fraction(n[0])
    for c, (a, b) in zip(n[1:], box):
        lo += c * (a if c > 0 else b)
        hi += c * (b if c > 0 else a)
    return Enclosure(lo, hi)


@dataclass
class WitnessReport:
    nu: int
    n: list[int]
    zeta: Enclosure  # |n . (1, alpha)| over the box
    band: Enclosure  # prod psi(p_mu) times the perturbed schedule determinant range
    in_band: bool
    cofactor_max: int
    cofactor_bound: Fraction
    cofactor_ok: bool
    cofactor_ratio: Enclosure  # max|n_j| / (p_{nu+r-1} psi(p_{nu+r-2}))

    @property
    def nonzero(self) -> bool:
        return self.zeta.lo > 0


def determinant_witness(cert: SingularCertificate, nu: int | None = None) -> WitnessReport:
    """Linear-form value of r consecutive certified approximations, checked against the product band."""
    r = cert.r
    if cert.depth < r:
        raise HorizonError(f"need depth >= {r}, have {cert.depth}")
    if nu is None:
        nu = cert.depth - r
    if not 0 <= nu <= cert.depth - r:
        raise HorizonError(f"witness index {nu} outside 0..{cert.depth - r}")
    lvs = cert.levels[nu:nu + r]
    rows = [[lv.p] + lv.a for lv in lvs]
    n = cofactor_vector(rows)
    z = linear_form_enclosure(n, cert.box)
    z = abs(z)
    prod = Enclosure.point(1)
    for lv in lvs:
        prod = prod * lv.psi
    eta = Enclosure(Fraction(0), Fraction(1))
    d = abs(interval_det([[Enclosure.point(cert.schedule.value(j, lv.nu)) + eta for j in range(1, r + 1)] for lv in lvs]))
    band = Enclosure(prod.lo * d.lo, prod.hi * d.hi)
    W = cert.schedule.W
    cmax = max(abs(v) for v in n[1:])
    # |n_j| <= sum_i p_i (r-1)! (W+1)^(r-1) prod_{k != i} psi(p_k)
    bound = Fraction(0)
    for i, lv in enumerate(lvs):
        t = Fraction(lv.p) * math.factorial(r - 1) * (W + 1) ** (r - 1)
        for k, other in enumerate(lvs):
            if k != i:
                t *= other.psi.hi
        bound += t
    scale = Enclosure(lvs[-1].p * lvs[-2].psi.lo, lvs[-1].p * lvs[-2].psi.hi)
    ratio = Enclosure(cmax / scale.hi, cmax / scale.lo)
    return WitnessReport(nu, n, z, band, band.lo <= z.lo and z.hi <= band.hi, cmax, bound, cmax <= bound, ratio)


def witness_from_rows(rows: Sequence[Sequence[int]], box: Sequence[tuple[Fraction, Fraction]]) -> Enclosure:
    """|det([[1, alpha], rows])| over the box; zero for dependent rows."""
    return abs(linear_form_enclosure(cofactor_vector(rows), box))


# --- singularity -----------------------------------------------------------------


@dataclass
class SingularityReport:
    witnesses: list[tuple[int, int, Enclosure, int | None]]  # (nu, N_nu, zeta, largest certified T)
    checks: list[tuple[int, int | None, bool]]  # (T, witness nu, ok)
    records: list[dict] = field(default_factory=list)  # enumeration cross-check

    @property
    def ok(self) -> bool:
        return all(ok for _, _, ok in self.checks)

    def certified_ranges(self) -> list[tuple[int, int]]:
        return [(N, T) for _, N, _, T in self.witnesses if T is not None and T >= N]


def _largest_T(psi: PsiFunction, zeta_hi: Fraction, start: int, bits: int) -> int | None:
    """Largest integer T >= start with psi(T) > zeta_hi (certified), or None."""
    if not psi.enclosure(start, bits).lo > zeta_hi:
        return None
    lo, hi = start, start * 2
    while psi.enclosure(hi, bits).lo > zeta_hi:
        lo, hi = hi, hi * 2
        if hi.bit_length() > 1 << 14:
            return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if psi.enclosure(mid, bits).lo > zeta_hi:
            lo = mid
        else:
            hi = mid
    return lo


def verify_singularity(cert: SingularCertificate, psi: PsiFunction | None = None, T_values: Sequence[int] | None = None,
                       enumerate_up_to: int = 0, bits: int = 64) -> SingularityReport:
    """Check ||m . alpha|| < psi(T) with 0 < max|m_j| <= T for every alpha in the box.

    Witnesses are the cofactor vectors of r consecutive levels; witness nu
    certifies every T in [N_nu, T_nu] with N_nu = max_{j>=1} |n_j| and T_nu
    the largest T with psi(T) above the certified value. Without T_values the
    endpoints and geometric midpoints of those ranges are checked. With
    enumerate_up_to > 0 the linear-form best approximations of the box
    midpoint are also computed and compared with psi(M_{nu+1}) and
    psi(M_{nu+r-1}).
    """
    psi = psi or cert.psi
    r = cert.r
    wit = []
    for nu in range(0, cert.depth - r + 1):
        w = determinant_witness(cert, nu)
        N = max(abs(v) for v in w.n[1:])
        wit.append((nu, N, w.zeta, _largest_T(psi, w.zeta.hi, N, bits) if w.zeta.hi > 0 else None))
    if not wit:
        raise HorizonError(f"need depth >= {r} for a linear-form witness")
    p0 = cert.levels[0].p
    T_top = max((t for *_, t in wit if t is not None), default=None)
    if T_values is None:
        T_values = []
        for _, N, _, T in wit:
            if T is not None and T >= N:
                T_values += sorted({N, math.isqrt(N * T), T})
    checks = []
    for T in T_values:
        if T < p0:
            raise HorizonError(f"T={T} below p_0={p0}")
        if T_top is None or T > T_top:
            raise HorizonError(f"T={T} beyond the certified horizon {T_top}")
        got = None
        pT = psi.enclosure(T, bits)
        for nu, N, z, _ in wit:
            if N <= T and z.hi < pT.lo:
                got = nu
                break
        checks.append((T, got, got is not None))
    rep = SingularityReport(wit, checks)
    if enumerate_up_to:
        rep.records = singular_records(cert, enumerate_up_to, psi, bits)
    return rep


def singular_records(cert: SingularCertificate, up_to_M: int, psi: PsiFunction | None = None, bits: int = 64) -> list[dict]:
    """Best linear-form approximations of the box midpoint, each with both decay comparisons."""
    psi = psi or cert.psi
    r = cert.r
    try:
        seq = best_linear_form(cert.midpoint(), up_to_M)
    except RationalDependence as exc:
        seq = exc.partial
    ents = seq.entries
    out = []
    for i, e in enumerate(ents):
        row = {"nu": e.nu, "m": list(e.m), "M": e.M, "zeta_next": None, "zeta_shifted": None}
        z = Fraction(e.zeta)
        if i + 1 < len(ents):
            row["zeta_next"] = z <= psi.enclosure(ents[i + 1].M, bits).lo
        if i + r - 1 < len(ents):
            row["zeta_shifted"] = z <= psi.enclosure(ents[i + r - 1].M, bits).lo
        out.append(row)
    return out
