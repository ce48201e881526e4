"""Exact exponential sums over Z/NZ and F_p[t]/(t^m), with the Newton,
critical-locus and Poincare-series invariants that govern their decay."""

from .engine import (
    CharacterIndex,
    ExpSumResult,
    Method,
    crt_split,
    expsum,
    expsum_all_characters,
    expsum_descent,
    expsum_ff,
    expsum_oracle,
    expsum_zoomed,
    max_over_characters,
)
from .polynomial import IntPolynomial, PolynomialSyntaxError, parse_polynomial, render_polynomial

__version__ = "0.1.0"

__all__ = [
    "CharacterIndex",
    "ExpSumResult",
    "IntPolynomial",
    "Method",
    "PolynomialSyntaxError",
    "crt_split",
    "expsum",
    "expsum_all_characters",
    "expsum_descent",
    "expsum_ff",
    "expsum_oracle",
    "expsum_zoomed",
    "max_over_characters",
    "parse_polynomial",
    "render_polynomial",
]
