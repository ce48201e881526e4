"""Poincare series of solution counts: rational reconstruction and poles.

P(T) = sum_{m>=1} a_{p,m} T^m is rational. From finitely many counts the
minimal linear recurrence is found by Berlekamp-Massey over Q, giving
P = N(T) / C(T) with C(0) = 1. A pole T_0 of the raw count series relates
to the exponent s_0 of the local zeta function through T_0 = p^{-n-s_0},
so its real part is t_0 = -n - log_p |T_0|.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

from .exact import pdivmod, pgcd, pmul, ptrim, squarefree_decomposition
from .newton import fraction_str

DEFAULT_MAX_DEGREE = 12
POLE_DPS = 50
SNAP_TOLERANCE = mpmath.mpf(10) ** -30
MAX_SNAP_DENOMINATOR = 1000
RANGE_TOLERANCE = 1e-9


def berlekamp_massey(seq: Sequence[Fraction]) -> list[Fraction]:
    """Shortest connection polynomial C (C[0] = 1) with
    sum_i C[i] * seq[j - i] = 0 for all j >= deg-length L."""
    s = [Fraction(x) for x in seq]
    C = [Fraction(1)]
    B = [Fraction(1)]
    L, shift, b = 0, 1, Fraction(1)
    for j in range(len(s)):
        delta = s[j] + sum((C[i] * s[j - i] for i in range(1, min(len(C), j + 1))), Fraction(0))
        if delta == 0:
            shift += 1
            continue
        coef = delta / b
        T = list(C)
        pad = [Fraction(0)] * shift + B
        if len(pad) > len(C):
            C = C + [Fraction(0)] * (len(pad) - len(C))
        for i, v in enumerate(pad):
            C[i] -= coef * v
        if 2 * L <= j:
            L = j + 1 - L
            B, b, shift = T, delta, 1
        else:
            shift += 1
    C = C + [Fraction(0)] * max(0, L + 1 - len(C))
    return C[: L + 1]


def series_of(num: Sequence[Fraction], den: Sequence[Fraction], M: int) -> list[Fraction]:
    """First M+1 coefficients (T^0..T^M) of num/den, den[0] != 0."""
    out = []
    for j in range(M + 1):
        acc = Fraction(num[j]) if j < len(num) else Fraction(0)
        for i in range(1, min(j, len(den) - 1) + 1):
            acc -= den[i] * out[j - i]
        out.append(acc / den[0])
    return out


def _rational_from_counts(counts: Sequence[int]) -> tuple[list[Fraction], list[Fraction], int]:
    C = berlekamp_massey(counts)
    L = len(C) - 1
    series = [Fraction(0)] + [Fraction(a) for a in counts]
    num = ptrim(pmul(C, series)[: len(series)])
    # deg num <= L + 1 for a genuine recurrence; keep only those terms
    num = ptrim(num[: L + 2])
    g = pgcd(num, C) if num else [Fraction(1)]
    if len(g) > 1:
        num = pdivmod(num, g)[0]
        C = pdivmod(C, g)[0]
    lead = C[0]
    return [c / lead for c in num], [c / lead for c in C], L


@dataclass(frozen=True)
class Pole:
    T0: complex
    t0: Fraction | float
    order: int
    trivial: bool = False

    @property
    def exact(self) -> bool:
        return isinstance(self.t0, Fraction)

    def to_record(self) -> dict:
        return {
            "T0_re": float(self.T0.real),
            "T0_im": float(self.T0.imag),
            "t0": fraction_str(self.t0) if self.exact else float(self.t0),
            "order": self.order,
            "trivial": self.trivial,
        }


@dataclass(frozen=True)
class PoincareData:
    p: int
    n: int
    counts: tuple[int, ...]
    recurrence: tuple[Fraction, ...]
    numerator: tuple[Fraction, ...]
    denominator: tuple[Fraction, ...]
    poles: tuple[Pole, ...] = ()
    stable: bool = True
    reproduces: bool = True

    @property
    def pole_reals(self) -> list[Fraction | float]:
        return [pl.t0 for pl in self.poles]

    @property
    def orders(self) -> list[int]:
        return [pl.order for pl in self.poles]

    def to_record(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "counts": list(self.counts),
            "recurrence": [fraction_str(c) for c in self.recurrence],
            "numerator": [fraction_str(c) for c in self.numerator],
            "denominator": [fraction_str(c) for c in self.denominator],
            "poles": [pl.to_record() for pl in self.poles],
            "stable": self.stable,
            "reproduces": self.reproduces,
        }


def _snap(x: mpmath.mpf) -> Fraction | float:
    frac = Fraction(str(mpmath.nstr(x, 40))).limit_denominator(MAX_SNAP_DENOMINATOR)
    if abs(x - mpmath.mpf(frac.numerator) / frac.denominator) < SNAP_TOLERANCE:
        return frac
    return float(x)


def denominator_poles(den: Sequence[Fraction], p: int, n: int) -> list[Pole]:
    """Roots of the denominator with multiplicity and their real parts t_0."""
    poles = []
    with mpmath.workdps(POLE_DPS):
        for factor, mult in squarefree_decomposition(den):
            coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in reversed(factor)]
            if len(coeffs) == 2:
                roots = [-coeffs[1] / coeffs[0]]
            else:
                roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=200)
            for r in roots:
                t0 = _snap(-n - mpmath.log(abs(r)) / mpmath.log(p))
                poles.append(Pole(complex(r), t0, mult, trivial=(t0 == 0)))
    poles.sort(key=lambda pl: (float(pl.t0), pl.T0.real, pl.T0.imag))
    return poles


def reconstruct_poincare(
    counts: Sequence[int],
    p: int,
    n: int,
    *,
    max_degree: int = DEFAULT_MAX_DEGREE,
) -> PoincareData:
    """Rational function behind a_{p,1..M}, with stability and pole data.

    Unstable when the recurrence needs more than ``max_degree`` terms, when
    there are too few counts to determine it twice over, or when dropping
    the last two counts changes the reconstructed function. Unstable
    results carry no poles.
    """
    counts = [int(a) for a in counts]
    M = len(counts)
    if M < 2:
        raise ValueError("need at least two counts")
    num, den, L = _rational_from_counts(counts)
    stable = L <= max_degree and 2 * L + 2 <= M
    if stable and M - 2 >= 2:
        num2, den2, _ = _rational_from_counts(counts[:-2])
        stable = num2 == num and den2 == den
    coeffs = series_of(num, den, M)
    reproduces = coeffs[0] == 0 and all(coeffs[m] == counts[m - 1] for m in range(1, M + 1))
    rec = tuple(berlekamp_massey(counts))
    poles = tuple(denominator_poles(den, p, n)) if stable and reproduces else ()
    return PoincareData(p, n, tuple(counts), rec, tuple(num), tuple(den), poles, stable, reproduces)


@dataclass(frozen=True)
class MonodromyReport:
    threshold: Fraction
    conforming: tuple[Pole, ...] = ()
    violations: tuple[Pole, ...] = ()
    trivial: tuple[Pole, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_record(self) -> dict:
        return {
            "threshold": fraction_str(self.threshold),
            "conforming": [pl.to_record() for pl in self.conforming],
            "violations": [pl.to_record() for pl in self.violations],
            "trivial": [pl.to_record() for pl in self.trivial],
            "ok": self.ok,
        }


def monodromy_range_check(poincare: PoincareData, s: int, d: int) -> MonodromyReport:
    """Each non-trivial pole must have t_0 = -1 or t_0 <= -(n-s)/d."""
    threshold = -Fraction(poincare.n - s, d)
    good, bad, trivial = [], [], []
    for pl in poincare.poles:
        if pl.trivial:
            trivial.append(pl)
            continue
        if pl.exact:
            ok = pl.t0 == -1 or pl.t0 <= threshold
        else:
            ok = abs(pl.t0 + 1) <= RANGE_TOLERANCE or pl.t0 <= float(threshold) + RANGE_TOLERANCE
        (good if ok else bad).append(pl)
    return MonodromyReport(threshold, tuple(good), tuple(bad), tuple(trivial))
