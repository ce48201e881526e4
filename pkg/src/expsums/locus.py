"""Critical locus of f_d, critical residues mod p, and solution counts mod p^m."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .arith import factorize, is_prime, valuation
from .kernels import check_cap
from .polynomial import IntPolynomial, gradient, top_form

DEFAULT_S_PRIMES = (101, 211, 401, 503)
# projective enumeration budget per sampled prime in estimate_s
DEFAULT_S_BUDGET = 3_000_000
S_SLOPE_TOLERANCE = 0.3


class InconsistentDimension(ValueError):
    """Dimension estimates disagree across primes; an explicit s is required."""


def critical_residues(
    f: IntPolynomial, p: int, *, cap: int | None = kernels.DEFAULT_TERM_CAP, workers: int = 1
) -> list[tuple[int, ...]]:
    """All x in F_p^n with grad f(x) = 0 mod p, sorted."""
    check_cap(p**f.nvars, cap)
    return kernels.common_zeros(gradient(f), p, f.nvars, workers)


def gradient_content_bound(f: IntPolynomial) -> int:
    return max((g.max_abs_coefficient() for g in gradient(top_form(f))), default=0)


def is_good_prime(f: IntPolynomial, p: int, *, smooth: bool = False) -> bool:
    """p does not divide d and exceeds every coefficient of grad f_d.

    With ``smooth=True`` also require that the reduction of f_d mod p has no
    critical point other than 0 (the s = 0 notion of good reduction).
    """
    d = f.degree
    if not is_prime(p) or d % p == 0 or p <= gradient_content_bound(f):
        return False
    if smooth:
        return critical_residues(top_form(f), p, cap=None) == [tuple([0] * f.nvars)]
    return True


def projective_critical_count(fd: IntPolynomial, q: int, workers: int = 1) -> int:
    """#{x in F_q^n : grad f_d(x) = 0}, counted chart by chart on P^{n-1}.

    The critical set of a homogeneous form is a cone, so the affine count is
    1 + (q - 1) * (number of projective points).
    """
    n = fd.nvars
    grads = gradient(fd)
    proj = 0
    for k in range(n):
        axes = [np.zeros(1, dtype=np.int64)] * k + [np.ones(1, dtype=np.int64)]
        axes += [np.arange(q, dtype=np.int64)] * (n - k - 1)
        proj += kernels.count_common_zeros(grads, q, axes, workers)
    return 1 + (q - 1) * proj


@dataclass(frozen=True)
class DimensionEvidence:
    q: int
    count: int
    slope: float

    def to_record(self) -> dict:
        return {"q": self.q, "count": self.count, "slope": self.slope}


@dataclass(frozen=True)
class LocusData:
    d: int
    n: int
    s_estimate: int
    s_evidence: tuple[DimensionEvidence, ...] = ()
    s_override: int | None = None
    crit_bound: int = 0

    @property
    def s(self) -> int:
        return self.s_override if self.s_override is not None else self.s_estimate

    def to_record(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "s": self.s,
            "s_estimate": self.s_estimate,
            "s_override": self.s_override,
            "s_evidence": [e.to_record() for e in self.s_evidence],
            "crit_bound": self.crit_bound,
        }


def _sample_primes(fd: IntPolynomial, primes: Sequence[int], budget: int) -> list[int]:
    n = fd.nvars
    good = [q for q in primes if is_good_prime(fd, q) and q ** max(n - 1, 0) * n <= budget]
    if len(good) >= 2:
        return good
    # fall back to smaller good primes that fit the projective budget
    limit = max(int(budget / n) ** (1 / max(n - 1, 1)), 13)
    q = int(limit)
    extra = []
    while q > 7 and len(good) + len(extra) < 3:
        if is_good_prime(fd, q) and q not in good:
            extra.append(q)
        q -= 1
    return sorted(good + extra)


def estimate_s(
    fd: IntPolynomial,
    primes: Sequence[int] = DEFAULT_S_PRIMES,
    *,
    override: int | None = None,
    budget: int = DEFAULT_S_BUDGET,
    workers: int = 1,
) -> LocusData:
    """Estimate s = dim Crit(f_d) from the growth of critical point counts.

    Lang-Weil style heuristic: N_q ~ c q^s. Each sampled prime gives a slope
    log N_q / log q, rounded; slopes disagreeing by more than 0.3 raise
    ``InconsistentDimension`` unless an override is given. The override
    always wins and the evidence is still recorded.
    """
    if not fd.is_homogeneous() or fd.degree < 2:
        raise ValueError("estimate_s needs a homogeneous form of degree >= 2")
    n, d = fd.nvars, fd.degree
    if override is not None and not 0 <= override <= n - 1:
        raise ValueError(f"s override {override} outside [0, {n - 1}]")
    evidence = []
    for q in _sample_primes(fd, primes, budget):
        count = projective_critical_count(fd, q, workers)
        evidence.append(DimensionEvidence(q, count, math.log(count) / math.log(q)))
    if not evidence:
        if override is None:
            raise InconsistentDimension("no good prime fits the budget; supply s explicitly")
        return LocusData(d, n, override, (), override, (d - 1) ** n)
    slopes = [e.slope for e in evidence]
    if max(slopes) - min(slopes) > S_SLOPE_TOLERANCE and override is None:
        raise InconsistentDimension(f"slopes {slopes} disagree; supply s explicitly")
    estimate = min(max(round(slopes[-1]), 0), n - 1)
    return LocusData(d, n, estimate, tuple(evidence), override, (d - 1) ** n)


# ---------------------------------------------------------------------------
# solution counts a_{p,m}


def count_solutions_bruteforce(
    f: IntPolynomial, p: int, m: int, *, cap: int | None = kernels.DEFAULT_TERM_CAP, workers: int = 1
) -> int:
    """a_{p,m} as h[0] of the value histogram over (Z/p^m)^n."""
    q = p**m
    check_cap(q**f.nvars, cap)
    h = kernels.value_histogram(f, q, kernels.full_axes(q, f.nvars), workers)
    return int(h[0])


def _content_valuation(g: IntPolynomial, p: int) -> int | None:
    if g.is_zero():
        return None
    return min(valuation(c, p) for c in g.terms.values())


def _divide(g: IntPolynomial, k: int) -> IntPolynomial:
    return IntPolynomial(g.nvars, {e: c // k for e, c in g.terms.items()})


@lru_cache(maxsize=None)
def _log_table(p: int) -> tuple[int, dict[int, int]]:
    """A primitive root g mod p and the discrete logarithm table of F_p^x."""
    order = p - 1
    factors = [r for r, _ in factorize(order)] if order > 1 else []
    g = next(g for g in range(1, p + 1) if all(pow(g, order // r, p) != 1 for r in factors))
    table, x = {}, 1
    for k in range(order):
        table[x] = k
        x = x * g % p
    return g, table


def _unit_normalizer(unit: int, e: int, p: int, M: int) -> int | None:
    """A unit c with unit * c^e equal to a canonical representative of the
    class of ``unit`` modulo e-th powers, or None when p divides e.

    For odd p, (Z/p^M)^x = mu_{p-1} x (1 + pZ/p^M). On the second factor the
    e-th power map is bijective (p does not divide e), so that component is
    removed entirely; on the cyclic first factor the class of omega^k is
    represented by omega^(k mod gcd(e, p-1)), omega the Teichmuller lift of
    a primitive root.
    """
    q = p**M
    phi = q // p * (p - 1)
    if math.gcd(e, phi) == 1:
        return pow(pow(unit, -1, q), pow(e, -1, phi), q)
    if p == 2 or e % p == 0:
        return None
    g, logs = _log_table(p)
    pm1 = q // p  # order of 1 + pZ/p^M
    teich = pow(unit, pm1, q)  # Teichmuller component of unit
    v = unit * pow(teich, -1, q) % q  # principal-unit component
    k = logs[unit % p]
    d = math.gcd(e, p - 1)
    r = k % d
    j = ((r - k) // d) * pow(e // d, -1, (p - 1) // d) % ((p - 1) // d) if d < p - 1 else 0
    omega = pow(g, pm1, q)
    return pow(omega, j, q) * pow(pow(v, -1, q), pow(e, -1, pm1), q) % q


def _canonical(g: IntPolynomial, p: int, M: int) -> IntPolynomial:
    """A representative with the same zero count mod p^M.

    Coefficients are reduced mod p^M and the first unit coefficient is scaled
    to 1. Then, term by term, a variable x_i not yet used whose exponent e is
    invertible mod phi(p^M) is rescaled by a unit so that the term's
    coefficient becomes a pure power of p; x -> c x with c a unit permutes
    (Z/p^M)^n, so the count is unchanged.
    """
    q = p**M
    terms = {e: c % q for e, c in g.terms.items() if c % q}
    for e in sorted(terms):
        if terms[e] % p:
            inv = pow(terms[e], -1, q)
            terms = {k: v * inv % q for k, v in terms.items()}
            break
    phi = q // p * (p - 1)
    fixed = [False] * g.nvars
    for e in sorted(terms):
        c = terms[e]
        k = valuation(c, p)
        unit = c // p**k
        if unit % (q // p**k) == 1:
            continue
        # prefer a variable whose exponent normalizes the unit completely
        free = [i for i, ei in enumerate(e) if ei and not fixed[i]]
        free.sort(key=lambda i: math.gcd(e[i], phi) != 1)
        for i in free:
            scale = _unit_normalizer(unit, e[i], p, M)
            if scale is not None:
                terms = {k2: v * pow(scale, k2[i], q) % q for k2, v in terms.items()}
                fixed[i] = True
                break
    return IntPolynomial(g.nvars, terms)


def _shift_scale(g: IntPolynomial, y: Sequence[int], p: int) -> IntPolynomial:
    """g(y + p x), expanded term by term with binomial coefficients."""
    n = g.nvars
    # expansions[i][e] = [(k, C(e, k) y_i^(e-k) p^k)] for (y_i + p x_i)^e
    expansions: list[dict[int, list[tuple[int, int]]]] = [{} for _ in range(n)]
    out: dict[tuple[int, ...], int] = {}
    for exp, coef in g.terms.items():
        partial = {(): coef}
        for i, e in enumerate(exp):
            if e not in expansions[i]:
                expansions[i][e] = [(k, math.comb(e, k) * y[i] ** (e - k) * p**k) for k in range(e + 1)]
            nxt: dict[tuple[int, ...], int] = {}
            for key, c in partial.items():
                for k, b in expansions[i][e]:
                    if b:
                        nk = key + (k,)
                        nxt[nk] = nxt.get(nk, 0) + c * b
            partial = nxt
        for key, c in partial.items():
            out[key] = out.get(key, 0) + c
    return IntPolynomial(n, out)


def _count_lifting(g: IntPolynomial, p: int, M: int) -> int:
    if M <= 0:
        return 1
    return _count_lifting_canonical(_canonical(g, p, M), p, M)


@lru_cache(maxsize=65536)
def _count_lifting_canonical(g: IntPolynomial, p: int, M: int) -> int:
    """#{x mod p^M : g(x) = 0 mod p^M} by recursion on p-adic digits."""
    n = g.nvars
    c = _content_valuation(g, p)
    if c is None or c >= M:
        return p ** (n * M)
    if c > 0:
        return p ** (n * c) * _count_lifting(_divide(g, p**c), p, M - c)
    zeros = kernels.common_zeros([g], p, n)
    if not zeros:
        return 0
    grads = gradient(g)
    total = 0
    for y in zeros:
        if any(gi(*y) % p for gi in grads):
            # Hensel: a smooth zero mod p has p^{(n-1)(M-1)} lifts mod p^M
            total += p ** ((n - 1) * (M - 1))
            continue
        h = _shift_scale(g, y, p)
        v = _content_valuation(h, p)
        if v is None or v >= M:
            total += p ** (n * (M - 1))
            continue
        total += p ** (n * (v - 1)) * _count_lifting(_divide(h, p**v), p, M - v)
    return total


def count_solutions(
    f: IntPolynomial,
    p: int,
    m: int,
    *,
    method: str = "auto",
    cap: int | None = kernels.DEFAULT_TERM_CAP,
    brute_limit: int = 2_000_000,
    workers: int = 1,
) -> int:
    """a_{p,m}: the number of x in (Z/p^m)^n with f(x) = 0 mod p^m.

    ``method="brute"`` enumerates the histogram; ``"lifting"`` uses the exact
    digit-by-digit recursion (smooth zeros lift by Hensel, singular zeros are
    rescaled and recursed); ``"auto"`` brute-forces below ``brute_limit``.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if m < 1:
        raise ValueError("m must be positive")
    if method == "auto":
        method = "brute" if p ** (m * f.nvars) <= brute_limit else "lifting"
    if method == "brute":
        return count_solutions_bruteforce(f, p, m, cap=cap, workers=workers)
    if method != "lifting":
        raise ValueError(f"unknown counting method {method!r}")
    check_cap(p**f.nvars, cap)
    return _count_lifting(f, p, m)


def solution_counts(f: IntPolynomial, p: int, M: int, **kw) -> list[int]:
    return [count_solutions(f, p, m, **kw) for m in range(1, M + 1)]
