from __future__ import annotations

import math
from fractions import Fraction

import pytest

from expsums import bounds as B
from expsums import engine
from expsums.arith import primes_up_to
from expsums.polynomial import parse_polynomial


def test_formula_examples():
    assert B.bound_conjecture1(4, 0, 3, 27) == pytest.approx(1 / 81)
    assert B.bound_conjecture1(1, 0, 2, 101) == pytest.approx(101**-0.5)
    assert B.conjecture1_exponent(4, 1, 3) == 1
    assert B.bound_igusa_homog(4, 3, 7, 3) == pytest.approx(7**-4)
    assert B.bound_igusa_homog(2, 2, 5, 1) == pytest.approx(1 / 5)
    assert B.bound_igusa_homog(3, 4, 13, 4) == pytest.approx(13**-3)
    assert B.bound_deligne(2, 0, 3, 101) == pytest.approx(4 / 101)
    assert B.bound_deligne(3, 1, 3, 7) == pytest.approx(4 / 7)
    assert B.bound_cubefree(2, 0, 3, 7) == pytest.approx(4 / 49)
    assert B.bound_newton(Fraction(1, 2), 2, 3, 4) == pytest.approx(3**-2 * 4)
    assert B.bound_deligne_product(2, 0, 3, 7 * 13) == pytest.approx(4 / 7 * 4 / 13)


def test_gauss_case_below_deligne():
    f = parse_polynomial("x^2", ["x"])
    for p in primes_up_to(60)[1:]:
        assert engine.max_over_characters(f, p).magnitude <= B.bound_deligne(1, 0, 2, p) * (1 + 1e-8)


def test_fit_examples():
    fit = B.fit_exponent([(4, 0.5), (9, 1 / 3), (25, 0.2)])
    assert fit.beta == pytest.approx(0.5) and fit.max_residual < 1e-12
    f = parse_polynomial("x^2", ["x"])
    series = [(p, engine.max_over_characters(f, p).magnitude) for p in primes_up_to(97)[1:]]
    assert abs(B.fit_exponent(series).beta - 0.5) < 0.01
    with pytest.raises(ValueError):
        B.fit_exponent([(4, 0.5), (9, 0.0), (25, 0.2)])


def test_fit_cubic_diagonal_cubes():
    names = ["x1", "x2", "x3", "x4"]
    f = parse_polynomial("x1^3 + x2^3 + x3^3 + x4^3", names)
    series = [(p**3, engine.max_over_characters(f, p**3).magnitude) for p in (5, 7, 11, 13)]
    assert B.fit_exponent(series).beta >= Fraction(4, 3) - 0.05


def test_verdict_semantics():
    spec = B.bound_spec("trivial", 2, 0, 3)
    v = B.make_verdict(spec, "f", "x", 7, 1, 1.0, 1.0 + 1e-12)
    assert v.passed and v.status == "pass"
    v = B.make_verdict(spec, "f", "x", 7, 1, 1.0, 1.1)
    assert v.hard_failure and v.status == "FAIL"
    spec = B.bound_spec("d2free", 2, 0, 3)
    v = B.make_verdict(spec, "f", "x", 7, 1, 0.1, 0.5)
    assert v.status == "report" and not v.hard_failure
    with pytest.raises(ValueError):
        B.bound_spec("newton_CAN", 2, 0, 3)


def test_igusa_m1_coverage():
    assert B.igusa_m1_covered(1, 2, 3)
    assert not B.igusa_m1_covered(2, 3, 61)
    assert B.igusa_m1_covered(2, 3, 67)


def test_plan_admits():
    assert B.plan_admits("cubefree", 49) and not B.plan_admits("cubefree", 343)
    assert B.plan_admits("deligne_squarefree", 30) and not B.plan_admits("deligne_squarefree", 12)
    assert not B.plan_admits("newton_CAN", 7)
