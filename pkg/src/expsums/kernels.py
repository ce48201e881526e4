"""Vectorized enumeration kernels shared by the sum engine and point counting.

A summation domain is a cartesian product of 1-D residue arrays ("axes").
Domains are sharded along the leading axes into blocks of at most
``CHUNK_ELEMENTS`` points; per-block results are merged associatively, so
blocks may be processed by a thread pool.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Iterator, Sequence, TypeVar

import numpy as np

from .polynomial import IntPolynomial

DEFAULT_TERM_CAP = 10**9
CHUNK_ELEMENTS = 1 << 21
THREADS_ENV = "EXPSUMS_THREADS"
EPS = np.finfo(float).eps
# per-entry error of the root-of-unity table (argument rounding + libm)
TABLE_ERROR = 10 * EPS
# pairwise summation of one block: error <= (log2(block) + 8) * eps * sum |x|
SUM_ERROR = (math.log2(CHUNK_ELEMENTS) + 8) * EPS
# int64 products of two residues must not overflow
MAX_MODULUS = 3_000_000_000

T = TypeVar("T")


class EnumerationCapExceeded(RuntimeError):
    def __init__(self, terms: int, cap: int):
        self.terms = terms
        self.cap = cap
        super().__init__(f"enumeration of {terms} terms exceeds cap {cap}")


def check_cap(terms: int, cap: int | None) -> None:
    if cap is not None and terms > cap:
        raise EnumerationCapExceeded(terms, cap)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


@lru_cache(maxsize=64)
def roots_table(N: int) -> tuple[np.ndarray, np.ndarray]:
    """cos and sin of 2*pi*k/N for k in [0, N), angles folded into [-pi, pi]."""
    k = np.arange(N, dtype=np.float64)
    k = np.where(k > N / 2, k - N, k)
    theta = (2 * np.pi) * (k / N)
    c, s = np.cos(theta), np.sin(theta)
    c.setflags(write=False)
    s.setflags(write=False)
    return c, s


@lru_cache(maxsize=64)
def unit_roots(N: int) -> np.ndarray:
    cos_t, sin_t = roots_table(N)
    z = cos_t + 1j * sin_t
    z.setflags(write=False)
    return z


def domain_size(axes: Sequence[np.ndarray]) -> int:
    return math.prod(len(a) for a in axes)


def iter_blocks(axes: Sequence[np.ndarray], chunk: int = CHUNK_ELEMENTS) -> Iterator[list[np.ndarray]]:
    axes = list(axes)
    total = domain_size(axes)
    if total <= chunk or len(axes) == 0:
        yield axes
        return
    head, rest = axes[0], axes[1:]
    rest_size = domain_size(rest)
    if rest_size <= chunk:
        step = max(1, chunk // rest_size)
        for start in range(0, len(head), step):
            yield [head[start : start + step]] + rest
    else:
        for i in range(len(head)):
            for block in iter_blocks(rest, chunk):
                yield [head[i : i + 1]] + block


def map_blocks(fn: Callable[[list[np.ndarray]], T], axes: Sequence[np.ndarray], workers: int = 1) -> list[T]:
    blocks = list(iter_blocks(axes))
    if workers <= 1 or len(blocks) == 1:
        return [fn(b) for b in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, blocks))


def values_on_grid(f: IntPolynomial, M: int, axes: Sequence[np.ndarray]) -> np.ndarray:
    """f mod M at every point of the product of ``axes``, flattened in C order."""
    if M > MAX_MODULUS:
        raise ValueError(f"modulus {M} too large for int64 kernels")
    n = f.nvars
    shape = tuple(len(a) for a in axes)
    out = np.zeros(shape, dtype=np.int64)
    maxe = f.max_exponents()
    powers = []
    for i, a in enumerate(axes):
        a = np.asarray(a, dtype=np.int64) % M
        tab = [np.ones_like(a)]
        for _ in range(maxe[i]):
            tab.append(tab[-1] * a % M)
        powers.append(tab)
    for exp, coef in f.terms.items():
        term = None
        for i, e in enumerate(exp):
            if e:
                view = powers[i][e].reshape([-1 if j == i else 1 for j in range(n)])
                term = view if term is None else term * view % M
        c = coef % M
        if term is None:
            out += c
        else:
            out += term * c % M
        out %= M
    return out.ravel()


def full_axes(N: int, n: int) -> list[np.ndarray]:
    return [np.arange(N, dtype=np.int64) for _ in range(n)]


def coset_axes(center: Sequence[int], step: int, count: int) -> list[np.ndarray]:
    """Axes of the coset center + step * [0, count)^n."""
    base = np.arange(count, dtype=np.int64) * step
    return [base + c for c in center]


def character_sum(f: IntPolynomial, M: int, u: int, axes: Sequence[np.ndarray], workers: int = 1) -> tuple[complex, int]:
    """Sum of e(u f(x) / M) over the domain.

    Each block is summed pairwise (relative error SUM_ERROR per term) and the
    block partials are merged with exact compensated summation.
    Returns (sum, number of blocks).
    """
    table = unit_roots(M)

    def block_sum(block):
        idx = values_on_grid(f, M, block) * (u % M) % M
        z = np.sum(table[idx])
        return z.real, z.imag

    parts = map_blocks(block_sum, axes, workers)
    re = math.fsum(p[0] for p in parts)
    im = math.fsum(p[1] for p in parts)
    return complex(re, im), len(parts)


def value_histogram(f: IntPolynomial, M: int, axes: Sequence[np.ndarray], workers: int = 1) -> np.ndarray:
    """h[v] = #{x in domain : f(x) = v mod M}."""

    def block_hist(block):
        return np.bincount(values_on_grid(f, M, block), minlength=M)

    parts = map_blocks(block_hist, axes, workers)
    h = np.zeros(M, dtype=np.int64)
    for part in parts:
        h += part
    return h


def values_at_points(f: IntPolynomial, M: int, pts: np.ndarray) -> np.ndarray:
    """f mod M at each row of the (B, k) array ``pts``; f may only use the
    first k variables."""
    out = np.zeros(len(pts), dtype=np.int64)
    maxe = f.max_exponents()
    # powers[i][e] = pts[:, i]^e mod M; built iteratively (a recursive closure
    # would form a reference cycle and keep these arrays alive until cyclic GC)
    powers: list[list[np.ndarray]] = []
    for i in range(f.nvars):
        tab: list[np.ndarray] = []
        if maxe[i]:
            col = pts[:, i] % M
            tab = [col, col]  # index 0 is never used for a present variable
            for _ in range(maxe[i] - 1):
                tab.append(tab[-1] * col % M)
        powers.append(tab)
    for exp, coef in f.terms.items():
        term = None
        for i, e in enumerate(exp):
            if e:
                term = powers[i][e] if term is None else term * powers[i][e] % M
        c = coef % M
        out += c if term is None else term * c % M
        out %= M
    return out


def _last_variable(g: IntPolynomial) -> int:
    """Largest variable index occurring in g (-1 for constants)."""
    last = -1
    for exp in g.terms:
        for i in range(len(exp) - 1, -1, -1):
            if exp[i]:
                last = max(last, i)
                break
    return last


def common_zeros(polys: Sequence[IntPolynomial], p: int, n: int, workers: int = 1) -> list[tuple[int, ...]]:
    """All points of F_p^n where every polynomial vanishes mod p, sorted.

    Coordinates are assigned one at a time; a polynomial is tested as soon
    as all of its variables are assigned, so partial points die early.
    The result equals full enumeration of F_p^n.
    """
    groups: dict[int, list[IntPolynomial]] = {}
    for g in polys:
        g = IntPolynomial(g.nvars, {e: c for e, c in g.terms.items() if c % p})
        if g.is_zero():
            continue
        groups.setdefault(_last_variable(g), []).append(g)
    if groups.get(-1):
        return []  # a nonzero constant never vanishes
    digits = np.arange(p, dtype=np.int64)
    pts = np.zeros((1, 0), dtype=np.int64)
    for k in range(n):
        step = max(1, CHUNK_ELEMENTS // p)
        kept = []
        for start in range(0, len(pts), step):
            block = pts[start : start + step]
            ext = np.concatenate([np.repeat(block, p, axis=0), np.tile(digits, len(block))[:, None]], axis=1)
            mask = np.ones(len(ext), dtype=bool)
            for g in groups.get(k, []):
                mask &= values_at_points(g, p, ext) == 0
            kept.append(ext[mask])
        pts = np.concatenate(kept) if kept else np.zeros((0, k + 1), dtype=np.int64)
        if len(pts) == 0:
            return []
    return sorted(tuple(int(v) for v in row) for row in pts)


def count_common_zeros(polys: Sequence[IntPolynomial], p: int, axes: Sequence[np.ndarray], workers: int = 1) -> int:
    """Number of points of the product domain where every polynomial vanishes mod p."""

    def block_count(block):
        mask = np.ones(domain_size(block), dtype=bool)
        for g in polys:
            if g.is_zero():
                continue
            mask &= values_on_grid(g, p, block) == 0
            if not mask.any():
                return 0
        return int(mask.sum())

    return sum(map_blocks(block_count, axes, workers))
