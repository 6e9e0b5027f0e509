"""Exact matrix routines over Z and Q (fraction-free elimination)."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


def det(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix by Bareiss elimination."""
    m = [list(map(int, r)) for r in rows]
    n = len(m)
    if any(len(r) != n for r in m):
        raise ValueError("matrix must be square")
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer (or rational) matrix, fraction-free."""
    m = [list(r) for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, len(m)):
            if m[i][c] != 0:
                a, b = m[r][c], m[i][c]
                m[i] = [a * x - b * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Unique solution of the square system a x = b over Q, or None if singular."""
    n = len(a)
    m = [[Fraction(v) for v in row] + [Fraction(bi)] for row, bi in zip(a, b)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [v * inv for v in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [m[i][n] for i in range(n)]


def det_rational(rows: Sequence[Sequence]) -> Fraction:
    n = len(rows)
    m = [[Fraction(v) for v in r] for r in rows]
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return d


def lll_reduce(rows: Sequence[Sequence[int]], delta: Fraction = Fraction(99, 100)) -> list[list[int]]:
    """LLL-reduced basis of the lattice spanned by linearly independent integer rows.

    Integral variant: Gram-Schmidt data is kept as the integers
    d_i = det(Gram of b_1..b_i) and lam_ij = d_j mu_ij, updated in place, so
    no rational arithmetic is needed.
    """
    b = [list(map(int, r)) for r in rows]
    n = len(b)
    if n < 2:
        return b
    da, db = Fraction(delta).numerator, Fraction(delta).denominator

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    # 1-based as in the textbook formulation; d[0] = 1
    d = [1] + [0] * n
    lam = [[0] * (n + 1) for _ in range(n + 1)]

    def B(i):
        return b[i - 1]

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l]:
            q = (2 * lam[k][l] + d[l]) // (2 * d[l])
            b[k - 1] = [x - q * y for x, y in zip(B(k), B(l))]
            lam[k][l] -= q * d[l]
            for i in range(1, l):
                lam[k][i] -= q * lam[l][i]

    def swap(k, kmax):
        b[k - 1], b[k - 2] = b[k - 2], b[k - 1]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        la = lam[k][k - 1]
        nb = (d[k - 2] * d[k] + la * la) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - la * t) // d[k - 1]
            lam[i][k - 1] = (nb * t + la * lam[i][k]) // d[k]
        d[k - 1] = nb

    d[1] = dot(B(1), B(1))
    if d[1] == 0:
        raise ValueError("rows are linearly dependent")
    k, kmax = 2, 1
    while k <= n:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = dot(B(k), B(j))
                for i in range(1, j):
                    u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise ValueError("rows are linearly dependent")
                    d[k] = u
        red(k, k - 1)
        if db * d[k] * d[k - 2] < da * d[k - 1] ** 2 - db * lam[k][k - 1] ** 2:
            swap(k, kmax)
            k = max(2, k - 1)
        else:
            for l in range(k - 2, 0, -1):
                red(k, l)
            k += 1
    return b


def inverse(rows: Sequence[Sequence]) -> list[list[Fraction]] | None:
    """Inverse of a square matrix over Q, or None if singular."""
    n = len(rows)
    m = [[Fraction(v) for v in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return None
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [v * inv for v in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [r[n:] for r in m]


def box_points(basis: Sequence[Sequence[int]], half: Sequence[int]) -> list[tuple[int, ...]]:
    """Lattice points y = x B (x integer) with |y_k| <= half[k] for every k.

    The coefficient box comes from the exact inverse; the basis should be
    reduced or the box is large.
    """
    inv = inverse(basis)
    if inv is None:
        raise ValueError("basis is singular")
    n = len(basis)
    bounds = []
    for i in range(n):
        R = sum(abs(inv[k][i]) * half[k] for k in range(n))
        bounds.append(int(R))
    out = []
    # depth-first over the coefficient box, keeping running partial sums
    dims = len(half)

    def rec(i, acc):
        if i == n:
            if all(abs(acc[k]) <= half[k] for k in range(dims)):
                out.append(tuple(acc))
            return
        for x in range(-bounds[i], bounds[i] + 1):
            rec(i + 1, [a + x * v for a, v in zip(acc, basis[i])])

    rec(0, [0] * dims)
    return out


def row_basis(gens: Sequence[Sequence[int]]) -> list[list[int]]:
    """Echelon basis of the integer lattice spanned by the generator rows."""
    rows = [list(map(int, g)) for g in gens]
    out = []
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        live = [r for r in rows if r[c] != 0]
        rest = [r for r in rows if r[c] == 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[c]))
            piv = live[0]
            nxt = [piv]
            for r in live[1:]:
                q = r[c] // piv[c]
                r = [x - q * y for x, y in zip(r, piv)]
                (nxt if r[c] != 0 else rest).append(r)
            live = nxt
        if live:
            out.append(live[0])
        rows = [r for r in rest if any(r)]
    return out
