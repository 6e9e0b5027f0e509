"""Lift an r-dimensional singular vector to r+1 dimensions and watch the determinants.

For xi near (0, ..., 0, 1) in R^{r+2}, the extra coordinate is
alpha_{r+1} = xi_0 + xi_1 alpha_1 + ... + xi_r alpha_r: the vector
(1, alpha, alpha_{r+1}) is orthogonal to the image of the hyperplane
(1, alpha, 0)^perp under the map fixing Z^{r+1} and sending xi to the last unit
vector. For almost every xi, all but finitely many best approximations of the
lifted vector are those of alpha, so r+2 consecutive ones are dependent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ..analysis import delta_det, tail_lattice_dim
from ..enumerate import RationalDependence, best_linear_form
from ..seeding import generator, randint
from .singular import SingularCertificate


@dataclass
class LiftSample:
    index: int
    xi: list[Fraction]
    alpha: list[Fraction]
    records: list[tuple[int, ...]]
    deltas: list[int]  # Delta^{r+1} of consecutive windows
    tail_start: int | None  # 0-based index of the first record in the longest zero-determinant suffix
    tail_rank: int | None
    hit_relation: bool = False
    note: str = ""

    @property
    def tail_length(self) -> int:
        return 0 if self.tail_start is None else len(self.records) - self.tail_start

    def passed(self, min_tail: int, dim: int) -> bool:
        return self.tail_length >= min_tail and self.tail_rank is not None and self.tail_rank <= dim

    def to_json(self, min_tail: int, dim: int) -> dict:
        return {
            "index": self.index,
            "xi": [str(x) for x in self.xi],
            "records": [list(m) for m in self.records],
            "deltas": [str(d) for d in self.deltas],
            "tail_start": self.tail_start,
            "tail_length": self.tail_length,
            "tail_rank": self.tail_rank,
            "hit_relation": self.hit_relation,
            "passed": self.passed(min_tail, dim),
            "note": self.note,
        }


@dataclass
class LiftReport:
    r: int
    epsilon: Fraction
    grid: int
    horizon: int
    min_tail: int
    seed: int = 0
    samples: list[LiftSample] = field(default_factory=list)

    @property
    def passes(self) -> int:
        return sum(s.passed(self.min_tail, self.r + 1) for s in self.samples)

    @property
    def ok(self) -> bool:
        return self.passes >= 1

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "epsilon": str(self.epsilon),
            "grid": self.grid,
            "horizon": self.horizon,
            "min_tail": self.min_tail,
            "seed": self.seed,
            "passes": self.passes,
            "samples": [s.to_json(self.min_tail, self.r + 1) for s in self.samples],
        }


def lifted_target(alpha: Sequence[Fraction], xi: Sequence[Fraction]) -> list[Fraction]:
    """(alpha_1, ..., alpha_r, xi_0 + sum xi_j alpha_j); the last xi coordinate drops out."""
    r = len(alpha)
    if len(xi) != r + 2:
        raise ValueError(f"xi needs {r + 2} coordinates")
    extra = xi[0] + sum(x * a for x, a in zip(xi[1:r + 1], alpha))
    return list(alpha) + [extra]


def sample_xi(rng, r: int, epsilon: Fraction, grid: int) -> list[Fraction]:
    """Uniform grid point k/grid in the Euclidean ball of radius epsilon about (0, ..., 0, 1), center excluded."""
    k_max = int(epsilon * grid)
    while True:
        ks = [randint(rng, -k_max, k_max) for _ in range(r + 2)]
        if any(ks) and sum(k * k for k in ks) <= (epsilon * grid) ** 2:
            xi = [Fraction(k, grid) for k in ks]
            xi[-1] += 1
            return xi


def _zero_suffix(deltas: Sequence[int]) -> int | None:
    """Index of the first window in the longest all-zero suffix of deltas, or None."""
    i = len(deltas)
    while i > 0 and deltas[i - 1] == 0:
        i -= 1
    return i if i < len(deltas) else None


def dimension_lift(cert: SingularCertificate, epsilon=Fraction(1, 8), seed: int = 0, samples: int = 5,
                   horizon: int = 4000, grid: int = 1 << 16, min_tail: int = 5) -> LiftReport:
    """Enumerate best linear forms of the lifted midpoint of cert for seeded xi samples.

    A sample passes when its records end in a suffix of at least min_tail
    entries whose consecutive (r+2)-windows all have zero determinant and
    whose stacked rank is at most r+1. The grid makes alpha_{r+1} satisfy an
    integer relation of height about grid, so the horizon should stay well
    below it.
    """
    epsilon = Fraction(epsilon)
    r = cert.r
    alpha = cert.midpoint()
    if not 0 < epsilon < Fraction(1, 2):
        raise ValueError("epsilon must lie in (0, 1/2)")
    rep = LiftReport(r, epsilon, grid, horizon, min_tail, seed)
    w = r + 2
    for i in range(samples):
        xi = sample_xi(generator(seed, i), r, epsilon, grid)
        target = lifted_target(alpha, xi)
        hit = False
        try:
            seq = best_linear_form(target, horizon)
        except RationalDependence as exc:
            seq, hit = exc.partial, True
        recs = [tuple(e.m) for e in seq.entries]
        deltas = [delta_det(seq, k + 1) for k in range(len(recs) - w + 1)]
        start = _zero_suffix(deltas)
        tail_rank = None
        note = ""
        if start is not None:
            tail_rank = tail_lattice_dim(seq, start + 1)
        else:
            note = "no zero-determinant tail within the horizon"
        rep.samples.append(LiftSample(i, xi, target, recs, deltas, start, tail_rank, hit, note))
    return rep
