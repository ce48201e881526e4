"""Exact rational linear algebra and univariate polynomial helpers.

Everything here works on ``fractions.Fraction`` or plain ``int`` so that
results feeding exponents (sigma, face dimensions, pole locations) are exact.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import List, Sequence

Matrix = List[List[Fraction]]


def to_fraction_matrix(rows: Sequence[Sequence[int | Fraction]]) -> Matrix:
    return [[Fraction(v) for v in row] for row in rows]


def row_echelon(rows: Sequence[Sequence[int | Fraction]]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    a = to_fraction_matrix(rows)
    if not a:
        return a, []
    ncols = len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                factor = a[i][c]
                a[i] = [vi - factor * vr for vi, vr in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a, pivots


def rank(rows: Sequence[Sequence[int | Fraction]]) -> int:
    if not rows:
        return 0
    return len(row_echelon(rows)[1])


def nullspace(rows: Sequence[Sequence[int | Fraction]], ncols: int) -> Matrix:
    """Basis of {x : A x = 0} as a list of Fraction vectors."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, pivots = row_echelon(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def primitive_integer_vector(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Scale a rational vector to the primitive integer vector on the same ray."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g == 0:
        return tuple(ints)
    return tuple(x // g for x in ints)


def det_int(mat: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant by fraction-free Bareiss elimination."""
    n = len(mat)
    if n == 0:
        return 1
    a = [list(map(int, row)) for row in mat]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def smith_diagonal(mat: Sequence[Sequence[int]]) -> list[int]:
    """Invariant factors of a square integer matrix.

    Uses determinantal divisors: the k-th invariant factor is
    gcd(k x k minors) / gcd((k-1) x (k-1) minors). Fine for n <= 6.
    """
    n = len(mat)
    divisors = [1]
    for k in range(1, n + 1):
        g = 0
        for rows in combinations(range(n), k):
            for cols in combinations(range(n), k):
                g = gcd(g, det_int([[mat[i][j] for j in cols] for i in rows]))
        divisors.append(g)
    out = []
    for k in range(1, n + 1):
        if divisors[k] == 0:
            out.append(0)
        else:
            out.append(divisors[k] // divisors[k - 1])
    return out


# ---------------------------------------------------------------------------
# univariate polynomials over Q, coefficient lists low degree first

Poly = List[Fraction]


def ptrim(p: Sequence[Fraction]) -> Poly:
    out = [Fraction(c) for c in p]
    while out and out[-1] == 0:
        out.pop()
    return out


def pmul(a: Sequence[Fraction], b: Sequence[Fraction]) -> Poly:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return ptrim(out)


def psub(a: Sequence[Fraction], b: Sequence[Fraction]) -> Poly:
    n = max(len(a), len(b))
    return ptrim([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)])


def pdivmod(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Poly, Poly]:
    b = ptrim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = ptrim(a)
    if len(r) < len(b):
        return [], r
    q = [Fraction(0)] * (len(r) - len(b) + 1)
    lead = b[-1]
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        c = r[-1] / lead
        q[shift] = c
        r = psub(r, [Fraction(0)] * shift + [c * x for x in b])
    return ptrim(q), r


def pmonic(a: Sequence[Fraction]) -> Poly:
    a = ptrim(a)
    if not a:
        return a
    lead = a[-1]
    return [c / lead for c in a]


def pgcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> Poly:
    a, b = ptrim(a), ptrim(b)
    while b:
        a, b = b, pdivmod(a, b)[1]
    return pmonic(a)


def pderiv(a: Sequence[Fraction]) -> Poly:
    return ptrim([i * c for i, c in enumerate(a)][1:])


def squarefree_decomposition(a: Sequence[Fraction]) -> list[tuple[Poly, int]]:
    """Yun's algorithm: a = lead * prod g_k^k with g_k squarefree and coprime."""
    a = pmonic(a)
    out: list[tuple[Poly, int]] = []
    if len(a) <= 1:
        return out
    b = pgcd(a, pderiv(a))
    c = pdivmod(a, b)[0]
    d = psub(pdivmod(pderiv(a), b)[0], pderiv(c))
    k = 1
    while len(c) > 1:
        g = pgcd(c, d)
        if len(g) > 1:
            out.append((g, k))
        c = pdivmod(c, g)[0]
        d = psub(pdivmod(d, g)[0], pderiv(c))
        k += 1
    return out
