"""Seeded randomness.

Every random draw in the package comes from ``generator(seed, *key)``: a
Philox (counter-based) bit generator keyed by the seed and a spawn-key path.
Different key paths give independent streams, so adding a sample or a
command never shifts the numbers another one sees.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def generator(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def randint(rng: np.random.Generator, lo: int, hi: int) -> int:
    """Uniform integer in [lo, hi], also for bounds beyond 64 bits."""
    span = hi - lo + 1
    if span <= 0:
        raise ValueError("empty range")
    if span < 1 << 62:
        return lo + int(rng.integers(0, span))
    nbytes = (span.bit_length() + 7) // 8 + 8
    while True:
        v = int.from_bytes(rng.bytes(nbytes), "little")
        limit = (1 << (8 * nbytes)) - (1 << (8 * nbytes)) % span
        if v < limit:
            return lo + v % span


def rational_in(rng: np.random.Generator, den_max: int) -> Fraction:
    """Fraction k/q with q uniform in [2, den_max] and k uniform in [0, q)."""
    q = randint(rng, 2, den_max)
    return Fraction(randint(rng, 0, q - 1), q)


def random_stream(seed: int, *key: int, chunk: int = 64):
    """A uniform random real in [0, 1) as a lazy binary expansion.

    Bits are drawn chunk by chunk from independent keyed generators, so any
    prefix is reproducible without drawing the rest.
    """
    from .exactreal import EnclosureStream

    words: list[int] = []

    def approx(eps):
        k = 1
        while Fraction(1, 2**k) > eps:
            k += 1
        while len(words) * chunk < k:
            words.append(randint(generator(seed, *key, len(words)), 0, 2**chunk - 1))
        v = 0
        for w in words:
            v = (v << chunk) | w
        total = len(words) * chunk
        return Fraction(v >> (total - k), 2**k)

    label = "stream:random(" + ",".join(str(int(x)) for x in (seed, *key)) + ")"
    return EnclosureStream(approx, label)
