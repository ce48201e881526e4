"""Upper bounds for E_f(N, xi), verdicts against observed sums, exponent fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .arith import factorize, is_power_free, prime_power
from .newton import fraction_str

RELATIVE_SLACK = 1e-8


class BoundName(str, Enum):
    CONJECTURE1 = "conjecture1"
    IGUSA_HOMOG = "igusa_homog"
    DELIGNE_SQUAREFREE = "deligne_squarefree"
    CUBEFREE = "cubefree"
    D2FREE = "d2free"
    NEWTON_CAN = "newton_CAN"
    TRIVIAL = "trivial"


@dataclass(frozen=True)
class BoundSpec:
    name: BoundName
    exponent: Fraction  # predicted ~ constant * N^{-exponent}
    constant_form: str
    applicability: str
    asserted: bool  # False: the constant is unknown, only ratios are reported


# ---------------------------------------------------------------------------
# formulas


def conjecture1_exponent(n: int, s: int, d: int) -> Fraction:
    if d < 2 or not 0 <= s <= n - 1:
        raise ValueError("need d >= 2 and 0 <= s <= n-1")
    return Fraction(n - s, d)


def bound_conjecture1(n: int, s: int, d: int, N: int, eps: float = 0.0) -> float:
    """N^{-(n-s)/d + eps}."""
    e = conjecture1_exponent(n, s, d)
    return float(N) ** (-float(e) + eps)


def bound_igusa_homog(n: int, d: int, p: int, m: int) -> float:
    """p^{-mn/d} (constant 1 for p not dividing d with smooth reduction)."""
    return float(p) ** (-float(Fraction(m * n, d)))


def igusa_m1_covered(n: int, d: int, p: int) -> bool:
    """At m = 1 the constant-1 bound p^{-n/d} is implied by the prime-field
    bound (d-1)^n p^{-n/2} only once p^{n(1/2 - 1/d)} >= (d-1)^n; below that
    cubic and higher Gauss sums can exceed p^{-n/d}."""
    if d == 2:
        return True
    return Fraction(p) ** (n * (d - 2)) >= Fraction(d - 1) ** (2 * d * n)


def bound_deligne(n: int, s: int, d: int, N: int) -> float:
    """(d-1)^{n-s} N^{-(n-s)/2}, one constant for the whole modulus."""
    return (d - 1) ** (n - s) * float(N) ** (-(n - s) / 2)


def bound_deligne_product(n: int, s: int, d: int, N: int) -> float:
    """Product of the per-prime bounds over the prime factors of square-free N."""
    out = 1.0
    for p, _ in factorize(N) if N > 1 else []:
        out *= bound_deligne(n, s, d, p)
    return out


def bound_cubefree(n: int, s: int, d: int, p: int) -> float:
    """(d-1)^{n-s} p^{-(n-s)}: the bound at modulus p^2."""
    return (d - 1) ** (n - s) * float(p) ** (-(n - s))


def bound_d2free(n: int, s: int, d: int, N: int) -> float:
    """N^{-(n-s)/d}; the true bound carries an unknown constant c(f_d)."""
    return float(N) ** (-float(conjecture1_exponent(n, s, d)))


def bound_newton(sigma: Fraction, kappa: int, p: int, m: int) -> float:
    """p^{-m sigma} m^{kappa-1}, up to an unknown constant."""
    return float(p) ** (-m * float(sigma)) * float(m) ** (kappa - 1)


def bound_trivial() -> float:
    return 1.0


# ---------------------------------------------------------------------------
# specs and applicability


def bound_spec(name: BoundName | str, n: int, s: int, d: int, sigma: Fraction | None = None) -> BoundSpec:
    name = BoundName(name)
    if name is BoundName.CONJECTURE1:
        return BoundSpec(name, Fraction(n - s, d), "1 (eps column reported)", "all N", False)
    if name is BoundName.IGUSA_HOMOG:
        return BoundSpec(name, Fraction(n, d), "1", "f homogeneous, s = 0, N = p^m, p good", True)
    if name is BoundName.DELIGNE_SQUAREFREE:
        return BoundSpec(name, Fraction(n - s, 2), "(d-1)^(n-s) per prime factor", "N square-free from good primes", True)
    if name is BoundName.CUBEFREE:
        return BoundSpec(name, Fraction(n - s, 2), "(d-1)^(n-s)", "N = p^2, p good", True)
    if name is BoundName.D2FREE:
        return BoundSpec(name, Fraction(n - s, d), "unknown c(f_d)", "N free of (d+2)-th powers", False)
    if name is BoundName.NEWTON_CAN:
        if sigma is None:
            raise ValueError("newton_CAN needs sigma")
        return BoundSpec(name, Fraction(sigma), "unknown c, times m^(kappa-1)", "N = p^m, m >= 2, f non-degenerate", False)
    return BoundSpec(BoundName.TRIVIAL, Fraction(0), "1", "all N", True)


def plan_admits(name: BoundName | str, N: int) -> bool:
    """Whether modulus N can ever satisfy the bound's hypotheses (f-independent)."""
    name = BoundName(name)
    pp = prime_power(N)
    if name in (BoundName.TRIVIAL, BoundName.CONJECTURE1):
        return True
    if name is BoundName.IGUSA_HOMOG:
        return pp is not None
    if name is BoundName.DELIGNE_SQUAREFREE:
        return N > 1 and is_power_free(N, 2)
    if name is BoundName.CUBEFREE:
        return pp is not None and pp[1] == 2
    if name is BoundName.D2FREE:
        return True
    if name is BoundName.NEWTON_CAN:
        return pp is not None and pp[1] >= 2
    return False


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class BoundVerdict:
    bound: BoundSpec
    f_id: str
    f_text: str
    N: int
    u_max: int
    max_over_xi: bool
    predicted: float
    observed: float
    abs_error_bound: float = 0.0

    @property
    def passed(self) -> bool:
        return self.observed <= self.predicted * (1 + RELATIVE_SLACK) + self.abs_error_bound

    @property
    def margin(self) -> float:
        return self.predicted - self.observed

    @property
    def ratio(self) -> float:
        return self.observed / self.predicted if self.predicted > 0 else math.inf

    @property
    def status(self) -> str:
        if not self.bound.asserted:
            return "report"
        return "pass" if self.passed else "FAIL"

    @property
    def hard_failure(self) -> bool:
        return self.bound.asserted and not self.passed

    def to_record(self) -> dict:
        return {
            "bound": self.bound.name.value,
            "name": self.f_text,
            "f_id": self.f_id,
            "N": self.N,
            "u_max": self.u_max,
            "predicted": self.predicted,
            "observed": self.observed,
            "ratio": self.ratio,
            "pass": self.status,
        }


def make_verdict(spec: BoundSpec, f_id: str, f_text: str, N: int, u_max: int, predicted: float,
                 observed: float, err: float = 0.0, max_over_xi: bool = True) -> BoundVerdict:
    return BoundVerdict(spec, f_id, f_text, N, u_max, max_over_xi, predicted, observed, err)


# ---------------------------------------------------------------------------
# exponent fit


@dataclass(frozen=True)
class ExponentFit:
    beta: float
    intercept: float
    max_residual: float
    points: int
    zeros: tuple[int, ...] = ()

    def to_record(self) -> dict:
        return {"beta": self.beta, "intercept": self.intercept, "max_residual": self.max_residual,
                "points": self.points, "zeros": list(self.zeros)}


def fit_exponent(series: Sequence[tuple[int, float]], zero_tol: float = 1e-12) -> ExponentFit:
    """Least-squares fit log maxE = c - beta log N; zero observations are
    excluded and listed separately."""
    pts = [(N, E) for N, E in series if E > zero_tol]
    zeros = tuple(N for N, E in series if E <= zero_tol)
    if len(pts) < 3:
        raise ValueError(f"need at least 3 nonzero points, have {len(pts)}")
    x = np.log([float(N) for N, _ in pts])
    y = np.log([float(E) for _, E in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return ExponentFit(float(-slope), float(intercept), float(np.max(np.abs(resid))), len(pts), zeros)


def fraction_text(x) -> str:
    return fraction_str(x)
