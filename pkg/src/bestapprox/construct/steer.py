"""Steering the directions of best simultaneous approximations.

A state is a rational target beta = a/p whose complete list of f-best
approximations tau_1, ..., tau_nu is known and ends in the exact point
(p, a). One step appends a new exact point (p', a') with

    p' = e + k p,  a' = c + k a,  w = p c - e a,

so that under the new target a'/p' the old last point has remainder w/p'.
Choosing w in a narrow cone around the wanted direction theta steers the
direction of tau_nu; every candidate is accepted only after a full
re-enumeration of the new target reproduces the old list plus (p', a').
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..analysis import signature_sequence
from ..enumerate import ApproxSequence, best_simultaneous, rational_box_denominators
from ..exactreal import Ordering, compare_certified, enclose, format_scalar, rsqrt
from ..intmat import box_points, lll_reduce, row_basis
from ..seeding import generator, randint
from ..norms import Norm, TieAtOptimum, gauge, gauge_enclosure, gauge_key, illuminates, nearest_integer_point


class SearchExhausted(RuntimeError):
    """No acceptable step within the candidate budget; ``state`` holds the progress so far."""

    def __init__(self, msg, state=None):
        super().__init__(msg)
        self.state = state


class IlluminationViolated(ValueError):
    pass


class ZeroSlack(ArithmeticError):
    """A comparison in the enumeration is an exact tie, so no neighbourhood is stable."""


# --- prefix stability -------------------------------------------------------------


def _second_best(f: Norm, y: Sequence[Fraction], a: Sequence[int]):
    """Smallest f(y - b) over integer b != a (as a gauge key)."""
    n = len(a)
    bound = None
    for i in range(n):
        for s in (1, -1):
            b = list(a)
            b[i] += s
            k = gauge_enclosure(f, [v - bi for v, bi in zip(y, b)], 32).hi
            bound = k if bound is None else min(bound, k)
    R = bound * f.sup_extent()
    ranges = [range(math.ceil(v - R), math.floor(v + R) + 1) for v in y]
    best = None
    for b in itertools.product(*ranges):
        if list(b) == list(a):
            continue
        key = gauge_key(f, [v - bi for v, bi in zip(y, b)])
        if best is None or compare_certified(key, best) is Ordering.LT:
            best = key
    return best


def _slack(f: Norm, big, small) -> Fraction:
    """Certified lower bound on g(big) - g(small) where big, small are gauge keys."""
    if f.kind == "l2":
        big, small = rsqrt(big), rsqrt(small)
    return enclose(big, 64).lo - enclose(small, 64).hi


def prefix_stability(beta: Sequence, f: Norm, seq: ApproxSequence | None = None) -> Fraction:
    """A radius eps such that every beta' with |beta' - beta|_inf < eps starts with the same
    best approximations as beta, up to beta's second-to-last one.

    Every decision made while enumerating denominators q <= P (P the
    second-to-last denominator) has a positive slack s: record against
    non-record, and nearest against second-nearest integer point. Moving
    beta by less than eps moves each remainder q beta - b by less than
    q eps in sup norm, hence its gauge by less than q eps r_f with r_f the
    largest gauge on the unit cube. eps = s_min / (2 P r_f) keeps every
    decision.
    """
    beta = [Fraction(b) for b in beta]
    Q = math.lcm(*[b.denominator for b in beta])
    seq = seq or best_simultaneous(beta, f, Q)
    if not seq.final_exact:
        raise ValueError("beta's enumeration did not reach its exact point")
    if len(seq) < 2:
        raise ValueError("beta has fewer than two best approximations")
    P = seq.entries[-2].p
    ent = {e.p: e for e in seq.entries}
    s_min = None
    rec = None
    for q in range(1, P + 1):
        y = [q * b for b in beta]
        if q in ent:
            e = ent[q]
            key = gauge_key(f, e.xi)
            if rec is not None:
                s = _slack(f, rec, key)
                if s <= 0:
                    raise ZeroSlack(f"record at q={q} is not certified strictly better")
                s_min = s if s_min is None else min(s_min, s)
            second = _second_best(f, y, e.a)
            s = _slack(f, second, key)
            if s <= 0:
                raise ZeroSlack(f"nearest point at q={q} ties")
            s_min = s if s_min is None else min(s_min, s)
            rec = key
        else:
            a = [math.floor(v + Fraction(1, 2)) for v in y]
            best = gauge_key(f, [v - ai for v, ai in zip(y, a)])
            second = _second_best(f, y, a)
            if compare_certified(second, best) is Ordering.LT:
                best = second
            s = _slack(f, best, rec)
            if s <= 0:
                raise ZeroSlack(f"q={q} ties the record")
            s_min = min(s_min, s) if s_min is not None else s
    rf_hi = enclose(f.max_over_cube(), 64).hi
    return s_min / (2 * P * rf_hi)


def prefix_check(beta: Sequence, f: Norm, eps: Fraction, samples: int = 10, seed: int = 0, scale: int = 1):
    """Re-enumerate `samples` random rational beta' with |beta' - beta|_inf < scale * eps.

    Returns (number keeping the prefix, list of outcomes).
    """
    beta = [Fraction(b) for b in beta]
    Q = math.lcm(*[b.denominator for b in beta])
    base = best_simultaneous(beta, f, Q)
    want = [(e.p, e.a) for e in base.entries[:-1]]
    grid = 1 << 20
    out = []
    for i in range(samples):
        rng = generator(seed, i)
        d = [Fraction(randint(rng, -grid + 1, grid - 1), grid) * eps * scale for _ in beta]
        bp = [b + x for b, x in zip(beta, d)]
        P = want[-1][0]
        try:
            got = best_simultaneous(bp, f, P)
            kept = [(e.p, e.a) for e in got.entries] == want
        except TieAtOptimum:
            kept = False
        out.append((bp, kept))
    return sum(k for _, k in out), out


# --- steering ---------------------------------------------------------------------


@dataclass
class SteeringStep:
    nu: int
    beta: list[Fraction]
    p: int
    a: list[int]
    theta: list[Fraction]
    realized: list[Fraction]  # direction of tau_nu under the final target of this step
    gap: Fraction  # f(realized - theta)
    tried: int

    def to_json(self) -> dict:
        return {
            "nu": self.nu,
            "beta": [format_scalar(b) for b in self.beta],
            "tau": [self.p, self.a],
            "target": [format_scalar(t) for t in self.theta],
            "realized": [format_scalar(x) for x in self.realized],
            "gap": format_scalar(self.gap),
            "tried": self.tried,
        }


@dataclass
class SteeringState:
    f: Norm
    tol: Fraction
    beta: list[Fraction]
    sequence: ApproxSequence
    targets: list[list[Fraction]]  # theta_1 ... theta_nu used so far
    steps: list[SteeringStep] = field(default_factory=list)

    @property
    def nu(self) -> int:
        return len(self.sequence)

    @property
    def p(self) -> int:
        return self.sequence.entries[-1].p

    @property
    def a(self) -> list[int]:
        return list(self.sequence.entries[-1].a)

    def gaps(self) -> list[Fraction]:
        out = []
        for e, th in zip(self.sequence.entries, self.targets):
            out.append(gauge(self.f, [x - t for x, t in zip(e.Xi, th)]))
        return out

    def trace(self) -> dict:
        return {
            "norm": str(self.f),
            "tol": format_scalar(self.tol),
            "beta": [format_scalar(b) for b in self.beta],
            "tau": [[e.p, list(e.a)] for e in self.sequence.entries],
            "steps": [s.to_json() for s in self.steps],
        }


def _exact_point_sequence(f: Norm, beta) -> ApproxSequence:
    Q = math.lcm(*[Fraction(b).denominator for b in beta])
    return best_simultaneous(beta, f, Q)


def initial_state(f: Norm, tol=Fraction(1, 8), beta: Sequence | None = None) -> SteeringState:
    """State for an integer (or given rational) starting target; the default is the origin."""
    beta = [Fraction(b) for b in (beta if beta is not None else [0] * f.dim)]
    seq = _exact_point_sequence(f, beta)
    if not seq.final_exact:
        raise ValueError("starting target must be rational")
    return SteeringState(f, Fraction(tol), beta, seq, [])


def _on_sphere(f: Norm, theta) -> list[Fraction]:
    theta = [Fraction(t) for t in theta]
    g = gauge(f, theta)
    if not isinstance(g, Fraction):
        raise ValueError("targets need a rational gauge value")
    if g == 0:
        raise ValueError("zero target")
    return [t / g for t in theta]


def _residue_solver(p: int, a: Sequence[int]):
    """s with sum s_i a_i = 1 (mod p), so that w = -e a (mod p) gives e = -s.w (mod p)."""
    # extended gcd over (a_1, ..., a_n, p)
    acc_g, acc = a[0], [1] + [0] * (len(a) - 1)
    for i in range(1, len(a)):
        g2, x, y = _xgcd(acc_g, a[i])
        acc = [x * c for c in acc]
        acc[i] += y
        acc_g = g2
    g2, x, _ = _xgcd(acc_g, p)
    if g2 != 1:
        raise ValueError("gcd(p, a) must be 1")
    return [(x * c) % p for c in acc]


def _xgcd(u: int, v: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while v:
        q, u, v = u // v, v, u % v
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if u < 0:
        u, x0, y0 = -u, -x0, -y0
    return u, x0, y0


def _cone_vectors(f: Norm, p: int, a: Sequence[int], theta, tol, want: int, max_rounds: int = 40):
    """Short w in the lattice {p c - e a} with f(w/f(w) - theta) <= tol, sorted by f(w)."""
    n = len(a)
    gens = [[-x for x in a]] + [[p * int(i == j) for j in range(n)] for i in range(n)]
    basis = lll_reduce(row_basis(gens))
    E = f.sup_extent()
    R = Fraction(max(1, math.isqrt(p)))
    found = {}
    for _ in range(max_rounds):
        H = math.ceil(R * E)
        for y in box_points(basis, [H] * n):
            if not any(y):
                continue
            g = gauge(f, y)
            if g > R:
                continue
            d = gauge(f, [v / g - t for v, t in zip(y, theta)])
            if d <= tol:
                found[tuple(y)] = g
        if len(found) >= want:
            break
        R *= 2
    return sorted(found.items(), key=lambda kv: kv[1])[:want] if found else []


def has_record_tie(seq: ApproxSequence, f: Norm) -> bool:
    """Whether some non-record q between two records ties the earlier record exactly.

    Such a tie has zero slack: an arbitrarily small change of the target can
    turn q into a new best approximation. The one built-in tie is skipped:
    q = p_last - p_prev has remainder exactly -xi_prev, where p_prev is the
    record just before the exact last point.
    """
    beta = [Fraction(b) for b in seq.target]
    Q = math.lcm(*[b.denominator for b in beta])
    U = [int(b * Q) for b in beta]
    E = f.sup_extent()
    ents = seq.entries
    skip = ents[-1].p - ents[-2].p if seq.final_exact and len(ents) >= 2 else None
    for e0, e1 in zip(ents, ents[1:]):
        key = gauge_key(f, e0.xi)
        D = gauge_enclosure(f, e0.xi, 32).hi
        for q in rational_box_denominators(U, Q, E * D, e0.p, e1.p - 1):
            if q == skip and e1 is ents[-1]:
                continue
            y = [q * b for b in beta]
            try:
                a, _ = nearest_integer_point(f, y)
            except TieAtOptimum as tie:
                a = tie.points[0]
            if compare_certified(gauge_key(f, [v - ai for v, ai in zip(y, a)]), key) is Ordering.EQ:
                return True
    return False


def _realized(seq: ApproxSequence, idx: int):
    return list(seq.entries[idx].Xi)


def steer_step(state: SteeringState, theta, budget: int = 400, cone_size: int = 12, refine: int = 3) -> SteeringState:
    """Append one exact point so that the current last point gets direction near theta.

    For each short w in the cone (shortest first) the multiplier k is doubled
    from its lower bound until a candidate verifies, then bisected `refine`
    times towards smaller denominators; a w is abandoned once its
    denominators pass the best accepted one. Every verification is a fresh
    enumeration of the candidate target.
    """
    f, tol = state.f, state.tol
    theta = _on_sphere(f, theta)
    if state.targets:
        prev = _realized(state.sequence, len(state.targets) - 1)
        ok, _ = illuminates(f, prev, theta)
        if not ok:
            raise IlluminationViolated(f"{[str(x) for x in theta]} does not illuminate the previous direction")
    p, a = state.p, state.a
    entries = state.sequence.entries
    D_prev = gauge_enclosure(f, entries[-2].xi, 32).lo if len(entries) >= 2 else None
    s = _residue_solver(p, a)
    want = [(en.p, tuple(en.a)) for en in entries]
    targets = state.targets + [theta]
    tried = 0
    best = None

    def attempt(e, c, k):
        nonlocal tried
        pn = e + k * p
        an = [ci + k * ai for ci, ai in zip(c, a)]
        if math.gcd(pn, *an) != 1:
            return None
        tried += 1
        beta = [Fraction(x, pn) for x in an]
        try:
            seq = best_simultaneous(beta, f, pn, max_entries=len(want) + 1)
        except TieAtOptimum:
            return None
        got = [(en.p, tuple(en.a)) for en in seq.entries]
        if got != want + [(pn, tuple(an))] or not seq.final_exact:
            return None
        gaps = [gauge(f, [x - t for x, t in zip(seq.entries[j].Xi, th)]) for j, th in enumerate(targets)]
        if any(gp > tol for gp in gaps) or has_record_tie(seq, f):
            return None
        return pn, beta, seq, gaps

    # fresh directions get half the tolerance; later steps move them slightly
    for w, g in _cone_vectors(f, p, a, theta, tol / 2, cone_size):
        e = (-sum(si * wi for si, wi in zip(s, w))) % p
        c = [(wi + e * ai) // p for wi, ai in zip(w, a)]
        # the old last point must beat the one before it under the new target
        k = 1 if e > 0 else 2
        if D_prev is not None and D_prev > 0:
            k = max(k, math.ceil((g / D_prev - e) / p))
        lo, hit = k - 1, None
        while tried < budget and (best is None or e + k * p < best[0]):
            hit = attempt(e, c, k) or attempt(e, c, k + 1)
            if hit:
                break
            lo, k = k, 2 * k
        if not hit:
            continue
        hi = k
        for _ in range(refine):
            if hi - lo <= 1 or tried >= budget:
                break
            mid = (lo + hi) // 2
            got = attempt(e, c, mid)
            if got:
                hit, hi = got, mid
            else:
                lo = mid
        if best is None or hit[0] < best[0]:
            best = hit
        if tried >= budget:
            break
    if best is None:
        raise SearchExhausted(f"no acceptable step for nu={len(entries)} after {tried} candidates", state)
    pn, beta, seq, gaps = best
    nu = len(entries)
    step = SteeringStep(nu, beta, pn, list(seq.entries[-1].a), theta, _realized(seq, nu - 1), gaps[-1], tried)
    return SteeringState(f, tol, beta, seq, targets, state.steps + [step])


def steer(f: Norm, targets: Sequence[Sequence], tol=Fraction(1, 8), count: int | None = None,
          budget: int = 400, state: SteeringState | None = None) -> SteeringState:
    """Run `count` steering steps, cycling through targets."""
    targets = [_on_sphere(f, t) for t in targets]
    if not targets:
        raise ValueError("no targets")
    count = len(targets) if count is None else count
    for i in range(1, min(count, len(targets))):
        ok, _ = illuminates(f, targets[i - 1], targets[i])
        if not ok:
            raise IlluminationViolated(f"target {i + 1} does not illuminate target {i}")
    state = state or initial_state(f, tol)
    for i in range(count):
        try:
            state = steer_step(state, targets[i % len(targets)], budget)
        except SearchExhausted as exc:
            exc.state = state
            raise
    return state


FSTAR_TARGETS = [[Fraction(3, 5), Fraction(1, 5)], [Fraction(1, 5), Fraction(3, 5)]]


@dataclass
class DemoResult:
    alpha: list[Fraction]
    sequence: ApproxSequence  # independent re-enumeration under f*
    signatures: list[str]
    sup_sequence: ApproxSequence
    sup_signatures: list[str]
    state: SteeringState

    @property
    def constant(self) -> bool:
        return all(s == "(+,+)" for s in self.signatures)

    @property
    def sup_nonconstant(self) -> bool:
        sigs = [s for s in self.sup_signatures if "0" not in s]
        return len(set(sigs)) > 1

    def to_json(self) -> dict:
        return {
            "alpha": [format_scalar(x) for x in self.alpha],
            "fstar": {"tau": [[e.p, list(e.a)] for e in self.sequence.entries], "signatures": self.signatures},
            "sup": {"tau": [[e.p, list(e.a)] for e in self.sup_sequence.entries], "signatures": self.sup_signatures},
            "trace": self.state.trace(),
        }


def constant_signature_demo(count: int = 10, tol=Fraction(1, 8), budget: int = 400) -> DemoResult:
    """Steer under f* towards alternating positive-quadrant targets, then re-verify from scratch.

    The returned signatures are those of the first `count` best
    approximations of the final target (the last, exact one is excluded).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    f = Norm.fstar()
    state = steer(f, FSTAR_TARGETS, tol, count, budget)
    alpha = state.beta
    seq = _exact_point_sequence(f, alpha)
    sigs = [str(s) for s in signature_sequence(seq)][:count]
    sup = _exact_point_sequence(Norm.sup(2), alpha)
    sup_sigs = [str(s) for s in signature_sequence(sup)]
    return DemoResult(alpha, seq, sigs, sup, sup_sigs, state)
