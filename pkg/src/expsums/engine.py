"""Exact evaluation of normalized exponential sums E_f(N, xi).

For xi = exp(2 pi i u / N) with gcd(u, N) = 1 the complex average

    N^{-n} * sum_{x in (Z/N)^n} xi^{f(x)}

is computed by one of several routes that agree up to float rounding:

* ``oracle``  direct enumeration of all N^n terms;
* ``crt``     multiplicative split over the prime-power factors of N;
* ``descent`` for N = p^m, m >= 2: only fibres over critical residues mod p
  contribute, since the sum over x = y + p^{m-1} z in z kills every class
  where the gradient of f is a unit;
* ``dft``     one histogram of f mod p^m and a transform give every
  character at once.

Function-field analogues over F_p[t]/(t^m) live at the bottom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from math import gcd
from typing import Sequence

import numpy as np

from . import kernels
from .arith import factorize, is_prime
from .kernels import EPS, SUM_ERROR, TABLE_ERROR, EnumerationCapExceeded, check_cap
from .locus import critical_residues
from .polynomial import IntPolynomial, render_polynomial

DEFAULT_TOLERANCE = 1e-8

# normalized error of a direct enumeration: table error plus two fsum levels
_DIRECT_ERROR = math.sqrt(2) * (TABLE_ERROR + SUM_ERROR + 2 * EPS)


class Method(str, Enum):
    ORACLE = "oracle"
    CRT = "crt"
    DESCENT = "descent"
    DFT = "dft"


@dataclass(frozen=True)
class CharacterIndex:
    """xi = exp(2 pi i u / N); u is a unit mod N (u = 0 when N = 1)."""

    N: int
    u: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("modulus must be positive")
        if self.N == 1:
            object.__setattr__(self, "u", 0)
        elif gcd(self.u, self.N) != 1:
            raise ValueError(f"u={self.u} is not a unit mod {self.N}; xi would not be primitive")
        else:
            object.__setattr__(self, "u", self.u % self.N)


@dataclass(frozen=True)
class ExpSumResult:
    char: CharacterIndex
    value: complex
    abs_error_bound: float
    method: Method
    term_count: int
    tolerance: float = DEFAULT_TOLERANCE
    magnitude: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "magnitude", abs(self.value))

    @property
    def N(self) -> int:
        return self.char.N

    @property
    def u(self) -> int:
        return self.char.u

    @property
    def flagged(self) -> bool:
        return self.abs_error_bound > self.tolerance

    def to_record(self, f: IntPolynomial | str, var_names: Sequence[str] | None = None) -> dict:
        text = f if isinstance(f, str) else render_polynomial(f, var_names)
        return {
            "f": text,
            "N": self.N,
            "u": self.u,
            "re": self.value.real,
            "im": self.value.imag,
            "magnitude": self.magnitude,
            "err": self.abs_error_bound,
            "method": self.method.value,
            "terms": self.term_count,
        }


def _as_char(N: int, char: CharacterIndex | int | None) -> CharacterIndex:
    if char is None:
        return CharacterIndex(N, 1)
    if isinstance(char, CharacterIndex):
        if char.N != N:
            raise ValueError(f"character is for modulus {char.N}, not {N}")
        return char
    return CharacterIndex(N, char)


# ---------------------------------------------------------------------------
# single-character routes


def expsum_oracle(
    f: IntPolynomial,
    N: int,
    char: CharacterIndex | int | None = None,
    *,
    cap: int | None = kernels.DEFAULT_TERM_CAP,
    workers: int = 1,
) -> ExpSumResult:
    """Direct enumeration over (Z/N)^n."""
    char = _as_char(N, char)
    terms = N**f.nvars
    check_cap(terms, cap)
    if N == 1:
        return ExpSumResult(char, complex(1.0), 0.0, Method.ORACLE, 1)
    total, _ = kernels.character_sum(f, N, char.u, kernels.full_axes(N, f.nvars), workers)
    return ExpSumResult(char, total / terms, _DIRECT_ERROR, Method.ORACLE, terms)


def crt_split(N: int, char: CharacterIndex | int | None = None) -> list[tuple[int, CharacterIndex]]:
    """Prime-power factors q_i of N with characters xi_i = xi^(a_i N / q_i).

    With 1/N = sum a_i / q_i (mod 1) one has a_i = (N/q_i)^{-1} mod q_i, so
    xi_i = exp(2 pi i u a_i / q_i).
    """
    char = _as_char(N, char)
    out = []
    for p, e in factorize(N):
        q = p**e
        a = pow(N // q, -1, q)
        out.append((q, CharacterIndex(q, char.u * a % q)))
    return out


def crt_combine(residues: Sequence[tuple[int, int]]) -> int:
    """x mod prod(q) from [(q_i, x mod q_i)], coprime q_i."""
    N = math.prod(q for q, _ in residues)
    x = 0
    for q, r in residues:
        M = N // q
        x += r * M * pow(M, -1, q)
    return x % N


def expsum_descent(
    f: IntPolynomial,
    p: int,
    m: int,
    char: CharacterIndex | int | None = None,
    *,
    cap: int | None = kernels.DEFAULT_TERM_CAP,
    workers: int = 1,
) -> ExpSumResult:
    """E_f(p^m, xi) for m >= 2 by summing only over critical fibres.

    S = p^n * sum over y mod p^{m-1} with grad f(y) = 0 mod p of e(u f(y)/p^m).
    """
    if m < 2:
        raise ValueError("descent needs m >= 2")
    q = p**m
    char = _as_char(q, char)
    n = f.nvars
    check_cap(p**n, cap)
    crit = critical_residues(f, p, cap=cap, workers=workers)
    fibre = p ** (m - 2)
    terms = len(crit) * fibre**n
    check_cap(terms, cap)
    total = 0j
    partials = []
    for P in crit:
        s, _ = kernels.character_sum(f, q, char.u, kernels.coset_axes(P, p, fibre), workers)
        partials.append(s)
    total = complex(math.fsum(z.real for z in partials), math.fsum(z.imag for z in partials))
    scale = p**n / q**n
    err = _DIRECT_ERROR * terms * scale
    return ExpSumResult(char, total * scale, err, Method.DESCENT, terms)


def expsum(
    f: IntPolynomial,
    N: int,
    char: CharacterIndex | int | None = None,
    *,
    cap: int | None = kernels.DEFAULT_TERM_CAP,
    workers: int = 1,
) -> ExpSumResult:
    """Dispatching evaluator: CRT over factors, descent on higher prime powers."""
    char = _as_char(N, char)
    if N == 1:
        return ExpSumResult(char, complex(1.0), 0.0, Method.ORACLE, 1)
    factors = crt_split(N, char)
    if len(factors) > 1:
        parts = [expsum(f, q, c, cap=cap, workers=workers) for q, c in factors]
        value = complex(1.0)
        err = 0.0
        for r in parts:
            value *= r.value
            err += r.abs_error_bound
        err += len(parts) * 4 * EPS
        return ExpSumResult(char, value, err, Method.CRT, sum(r.term_count for r in parts))
    p, m = factorize(N)[0]
    if m >= 2:
        return expsum_descent(f, p, m, char, cap=cap, workers=workers)
    return expsum_oracle(f, N, char, cap=cap, workers=workers)


def expsum_zoomed(
    f: IntPolynomial,
    P: Sequence[int],
    p: int,
    m: int,
    char: CharacterIndex | int | None = None,
    *,
    cap: int | None = kernels.DEFAULT_TERM_CAP,
    workers: int = 1,
) -> ExpSumResult:
    """Sum over the residue class P + (pZ/p^m)^n, normalized by p^{mn}."""
    if m < 1:
        raise ValueError("m must be positive")
    if len(P) != f.nvars:
        raise ValueError("point dimension mismatch")
    q = p**m
    char = _as_char(q, char)
    n = f.nvars
    terms = p ** ((m - 1) * n)
    check_cap(terms, cap)
    center = [c % p for c in P]
    s, _ = kernels.character_sum(f, q, char.u, kernels.coset_axes(center, p, p ** (m - 1)), workers)
    scale = 1 / q**n
    return ExpSumResult(char, s * scale, _DIRECT_ERROR * terms * scale, Method.ORACLE, terms)


# ---------------------------------------------------------------------------
# all characters at once


@dataclass(frozen=True)
class CharacterSweep:
    """Complex sums for every u mod p^m from one histogram and a transform.

    ``values[u]`` is the normalized complex sum for character u. With
    ``method == DFT`` from the full histogram every u is valid (including
    imprimitive ones); the descent histogram is only valid for units.
    """

    p: int
    m: int
    values: np.ndarray
    abs_error_bound: float
    method: Method
    term_count: int
    histogram: np.ndarray | None = None
    only_units: bool = False
    nvars: int = 1

    @property
    def q(self) -> int:
        return self.p**self.m

    def primitive_units(self) -> np.ndarray:
        u = np.arange(self.q)
        return u[u % self.p != 0]

    def result(self, u: int) -> ExpSumResult:
        char = CharacterIndex(self.q, u)
        return ExpSumResult(char, complex(self.values[char.u]), self.abs_error_bound, self.method, self.term_count)

    @property
    def results(self) -> dict[int, ExpSumResult]:
        return {int(u): self.result(int(u)) for u in self.primitive_units()}

    def argmax(self) -> int:
        units = self.primitive_units()
        mags = np.abs(self.values[units])
        return int(units[int(np.argmax(mags))])

    def max_magnitude(self) -> float:
        return float(abs(self.values[self.argmax()]))


def _transform(weights: np.ndarray, total_terms: int) -> tuple[np.ndarray, float]:
    """S(u) = sum_v w[v] e(u v / q) / total_terms for all u, with an error bound."""
    q = len(weights)
    spectrum = np.fft.ifft(weights.astype(np.float64)) * q / total_terms
    l2 = float(np.sqrt(np.sum(weights.astype(np.float64) ** 2)))
    err = 20 * (math.ceil(math.log2(max(q, 2))) + 1) * EPS * math.sqrt(q) * l2 / total_terms
    return spectrum, err


def expsum_all_characters(
    f: IntPolynomial,
    p: int,
    m: int,
    *,
    via: str = "full",
    cap: int | None = kernels.DEFAULT_TERM_CAP,
    workers: int = 1,
) -> CharacterSweep:
    """Every character mod p^m from one enumeration pass.

    ``via="full"`` enumerates (Z/p^m)^n and exposes the histogram of f mod
    p^m (so h[0] is the solution count). ``via="descent"`` (m >= 2) builds
    the histogram only over critical fibres, weighted by p^n, which is valid
    for primitive characters. ``via="auto"`` picks descent when m >= 2.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    n = f.nvars
    q = p**m
    total = q**n
    if via == "auto":
        via = "descent" if m >= 2 else "full"
    if via == "full":
        check_cap(total, cap)
        h = kernels.value_histogram(f, q, kernels.full_axes(q, n), workers)
        values, err = _transform(h, total)
        return CharacterSweep(p, m, values, err, Method.DFT, total, histogram=h, nvars=n)
    if via != "descent":
        raise ValueError(f"unknown route {via!r}")
    if m < 2:
        raise ValueError("descent needs m >= 2")
    check_cap(p**n, cap)
    crit = critical_residues(f, p, cap=cap, workers=workers)
    fibre = p ** (m - 2)
    terms = len(crit) * fibre**n
    check_cap(terms, cap)
    h = np.zeros(q, dtype=np.int64)
    for P in crit:
        h += kernels.value_histogram(f, q, kernels.coset_axes(P, p, fibre), workers)
    values, err = _transform(h * p**n, total)
    return CharacterSweep(p, m, values, err, Method.DESCENT, terms, only_units=True, nvars=n)


@dataclass(frozen=True)
class MaxOverCharacters:
    """max over primitive xi mod N of E_f(N, xi), assembled through CRT."""

    N: int
    u_max: int
    value: complex
    magnitude: float
    abs_error_bound: float
    method: Method
    term_count: int
    factors: tuple[tuple[int, int, float], ...] = ()  # (q_i, argmax u_i, max E_i)

    def as_result(self) -> ExpSumResult:
        return ExpSumResult(CharacterIndex(self.N, self.u_max), self.value, self.abs_error_bound,
                            self.method, self.term_count)


def max_over_characters(
    f: IntPolynomial,
    N: int,
    *,
    cap: int | None = kernels.DEFAULT_TERM_CAP,
    workers: int = 1,
    via: str = "auto",
) -> MaxOverCharacters:
    """Max of E_f(N, xi) over all primitive xi.

    The CRT map on primitive characters is a bijection onto tuples of
    primitive characters of the prime-power factors, so the maximum is the
    product of per-factor maxima; the maximizing u is recovered by CRT.
    """
    if N == 1:
        return MaxOverCharacters(1, 0, complex(1.0), 1.0, 0.0, Method.DFT, 1)
    value = complex(1.0)
    err = 0.0
    terms = 0
    residues = []
    factors = []
    methods = set()
    for p, m in factorize(N):
        q = p**m
        sweep = expsum_all_characters(f, p, m, via=via, cap=cap, workers=workers)
        ui = sweep.argmax()
        value *= complex(sweep.values[ui])
        err += sweep.abs_error_bound
        terms += sweep.term_count
        methods.add(sweep.method)
        factors.append((q, ui, float(abs(sweep.values[ui]))))
        # u_i = u * (N/q)^{-1} mod q  =>  u = u_i * (N/q) mod q
        residues.append((q, ui * (N // q) % q))
    method = Method.CRT if len(factors) > 1 else methods.pop()
    return MaxOverCharacters(N, crt_combine(residues), value, abs(value), err, method, terms, tuple(factors))


# ---------------------------------------------------------------------------
# function-field analogues over F_p[t]/(t^m)


def _tmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Product of truncated power series stored as (m, B) digit arrays."""
    m = a.shape[0]
    out = np.zeros_like(a)
    for k in range(m):
        acc = np.zeros(a.shape[1], dtype=np.int64)
        for j in range(k + 1):
            acc += a[j] * b[k - j]
        out[k] = acc % p
    return out


def expsum_ff(
    f: IntPolynomial,
    p: int,
    m: int,
    *,
    unit: Sequence[int] | None = None,
    center: Sequence[int] | None = None,
    cap: int | None = 10**8,
) -> ExpSumResult:
    """E_f(t^m, psi) over F_p[t]/(t^m).

    psi(sum c_j t^j) = e(c_{m-1} / p) is the canonical primitive character;
    ``unit`` (digits of a unit of F_p[t]/(t^m)) gives psi(unit * .), which
    sweeps all primitive characters. ``center`` restricts the constant
    digits of every coordinate to P (the zoomed sum), still normalized by
    p^{mn}.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if m < 1:
        raise ValueError("m must be positive")
    n = f.nvars
    free_digits = [(i, j) for i in range(n) for j in range(m) if center is None or j > 0]
    terms = p ** len(free_digits)
    check_cap(terms, cap)
    lam = np.zeros(m, dtype=np.int64)
    if unit is None:
        lam[0] = 1
    else:
        if len(unit) != m or unit[0] % p == 0:
            raise ValueError("unit must have m digits with nonzero constant digit")
        lam[:] = [c % p for c in unit]
    maxe = f.max_exponents()
    coefs = [(exp, c % p) for exp, c in f.terms.items() if c % p]
    cos_t, sin_t = kernels.roots_table(p)
    re_parts, im_parts = [], []
    block = kernels.CHUNK_ELEMENTS // max(1, m)
    for start in range(0, terms, block):
        idx = np.arange(start, min(terms, start + block), dtype=np.int64)
        B = len(idx)
        coords = [np.zeros((m, B), dtype=np.int64) for _ in range(n)]
        for k, (i, j) in enumerate(free_digits):
            coords[i][j] = (idx // p**k) % p
        if center is not None:
            for i in range(n):
                coords[i][0] = center[i] % p
        acc = np.zeros((m, B), dtype=np.int64)
        powers = []
        for i in range(n):
            one = np.zeros((m, B), dtype=np.int64)
            one[0] = 1
            tab = [one]
            for _ in range(maxe[i]):
                tab.append(_tmul(tab[-1], coords[i], p))
            powers.append(tab)
        for exp, c in coefs:
            term = None
            for i, e in enumerate(exp):
                if e:
                    term = powers[i][e] if term is None else _tmul(term, powers[i][e], p)
            if term is None:
                acc[0] += c
            else:
                acc += term * c
            acc %= p
        top = np.zeros(B, dtype=np.int64)
        for j in range(m):
            top += lam[m - 1 - j] * acc[j]
        top %= p
        re_parts.append(math.fsum(cos_t[top].tolist()))
        im_parts.append(math.fsum(sin_t[top].tolist()))
    total = complex(math.fsum(re_parts), math.fsum(im_parts))
    q_n = p ** (m * n)
    char = CharacterIndex(p, 1)
    return ExpSumResult(char, total / q_n, _DIRECT_ERROR * terms / q_n, Method.ORACLE, terms)


def ff_top_coefficient_polynomial(f: IntPolynomial, m: int) -> IntPolynomial:
    """Integer polynomial in n*m variables c_{i,j} (index i*m + j) equal to the
    t^{m-1} coefficient of f(sum_j c_{i,j} t^j).

    Reducing mod p turns E_f(t^m, psi) into an ordinary exponential sum over
    F_p^{mn} with u = 1.
    """
    n = f.nvars
    nv = n * m + 1  # last variable is t
    t_idx = n * m
    xs = []
    for i in range(n):
        acc = IntPolynomial.zero(nv)
        for j in range(m):
            e = [0] * nv
            e[i * m + j] = 1
            e[t_idx] = j
            acc = acc + IntPolynomial(nv, {tuple(e): 1})
        xs.append(acc)
    total = IntPolynomial.zero(nv)
    for exp, coef in f.terms.items():
        term = IntPolynomial.constant(nv, coef)
        for i, e in enumerate(exp):
            if e:
                term = term * xs[i] ** e
                # drop t-powers >= m to keep the expansion small
                term = IntPolynomial(nv, {k: v for k, v in term.terms.items() if k[t_idx] < m})
        total = total + term
    return IntPolynomial(n * m, {k[:t_idx]: v for k, v in total.terms.items() if k[t_idx] == m - 1} or {})
