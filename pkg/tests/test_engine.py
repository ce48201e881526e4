from __future__ import annotations

import cmath
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expsums import engine
from expsums.arith import factorize, units
from expsums.engine import CharacterIndex, Method
from expsums.kernels import EnumerationCapExceeded
from expsums.polynomial import IntPolynomial, evaluate, parse_polynomial

X = ["x"]
XY = ["x", "y"]


def brute(f, N, u):
    """Independent oracle: plain Python loop over all points."""
    n = f.nvars
    tot = 0j
    for k in range(N**n):
        pt = [(k // N**i) % N for i in range(n)]
        tot += cmath.exp(2j * math.pi * u * (evaluate(f, pt) % N) / N)
    return tot / N**n


def test_oracle_examples():
    assert engine.expsum_oracle(IntPolynomial.zero(1), 7, 3).value == pytest.approx(1)
    assert engine.expsum_oracle(parse_polynomial("x", X), 5, 1).magnitude < 1e-12
    assert engine.expsum_oracle(parse_polynomial("x^2", X), 9, 1).magnitude == pytest.approx(1 / 3, abs=1e-12)


def test_character_index_validation():
    with pytest.raises(ValueError):
        CharacterIndex(10, 5)
    assert CharacterIndex(1, 7).u == 0


def test_crt_split_examples():
    f = parse_polynomial("x^3 + y^3 + x*y", XY)
    parts = engine.crt_split(6, 1)
    assert [q for q, _ in parts] == [2, 3]
    assert all(math.gcd(c.u, q) == 1 for q, c in parts)
    prod = np.prod([engine.expsum_oracle(f, q, c).value for q, c in parts])
    assert abs(prod - engine.expsum_oracle(f, 6, 1).value) < 1e-12
    assert [(q, c.u) for q, c in engine.crt_split(7, 3)] == [(7, 3)]
    parts = engine.crt_split(12, 5)
    assert sorted(q for q, _ in parts) == [3, 4]
    prod = np.prod([engine.expsum_oracle(f, q, c).value for q, c in parts])
    assert abs(prod - engine.expsum_oracle(f, 12, 5).value) < 1e-12


def test_expsum_examples():
    f = parse_polynomial("x^2", X)
    r = engine.expsum(f, 45, 1)
    assert r.method is Method.CRT
    assert r.magnitude == pytest.approx(1 / 3 / math.sqrt(5), abs=1e-12)
    assert r.magnitude == pytest.approx(engine.expsum_oracle(f, 45, 1).magnitude, abs=1e-12)
    assert engine.expsum(parse_polynomial("x^5 + 3*x*y", XY), 1).value == 1
    g = parse_polynomial("x^2 + y^2", XY)
    assert abs(engine.expsum(g, 25, 1).value - engine.expsum_oracle(g, 25, 1).value) < 1e-8


def test_descent_examples():
    r = engine.expsum_descent(parse_polynomial("x^2", X), 5, 2, 1)
    assert r.value == pytest.approx(1 / 5, abs=1e-14)
    assert r.term_count == 1
    # no critical residues: the sum vanishes
    assert engine.expsum_descent(parse_polynomial("x^2 + x", X), 2, 3, 1).value == 0
    f = parse_polynomial("x^3 + y^3", XY)
    d = engine.expsum_descent(f, 7, 3, 1)
    o = engine.expsum_oracle(f, 343, 1)
    assert abs(d.value - o.value) < 1e-9
    assert d.term_count < o.term_count
    with pytest.raises(ValueError):
        engine.expsum_descent(f, 7, 1, 1)


def test_all_characters_examples():
    sw = engine.expsum_all_characters(parse_polynomial("x^2", X), 3, 1)
    assert list(sw.histogram) == [1, 2, 0]
    assert all(abs(abs(sw.values[u]) - 3**-0.5) < 1e-12 for u in (1, 2))
    sw = engine.expsum_all_characters(IntPolynomial.zero(2), 5, 1)
    assert sw.histogram[0] == 25 and np.allclose(sw.values, 1)
    sw = engine.expsum_all_characters(parse_polynomial("x", X), 5, 1)
    assert np.all(sw.histogram == 1)
    assert np.all(np.abs(sw.values[1:]) < 1e-12)


@pytest.mark.parametrize("text,p,m", [("x^3 + y^3 + x*y", 3, 3), ("x^2*y", 5, 2), ("x^4 - 2*y^2 + x", 2, 4)])
def test_all_character_routes_agree(text, p, m):
    f = parse_polynomial(text, XY)
    full = engine.expsum_all_characters(f, p, m, via="full")
    desc = engine.expsum_all_characters(f, p, m, via="descent")
    for u in full.primitive_units():
        ref = brute(f, p**m, int(u))
        assert abs(full.values[u] - ref) < 1e-9
        assert abs(desc.values[u] - ref) < 1e-9
        assert abs(full.values[u] - ref) <= full.abs_error_bound + 1e-12


def test_zoomed_examples():
    f = parse_polynomial("x^2 + 3*y", XY)
    r = engine.expsum_zoomed(f, (1, 2), 7, 1, 1)
    assert r.magnitude == pytest.approx(7**-2)
    g = parse_polynomial("x^2", X)
    assert engine.expsum_zoomed(g, (0,), 3, 2, 1).magnitude == pytest.approx(1 / 3)
    # the classes partition the full sum
    h = parse_polynomial("x^3 - x*y + 2*y^2", XY)
    total = sum(engine.expsum_zoomed(h, (a, b), 3, 3, 2).value for a in range(3) for b in range(3))
    assert abs(total - engine.expsum_oracle(h, 27, 2).value) < 1e-12


def test_function_field_examples():
    assert engine.expsum_ff(parse_polynomial("x", X), 3, 2).magnitude < 1e-12
    assert engine.expsum_ff(parse_polynomial("x^2", X), 3, 1).magnitude == pytest.approx(3**-0.5)
    r = engine.expsum_ff(parse_polynomial("x^2", X), 3, 2)
    assert r.term_count == 9


def test_function_field_matches_top_coefficient_polynomial():
    f = parse_polynomial("x^3 + x*y + 2*y^2", XY)
    m, p = 2, 5
    a = engine.expsum_ff(f, p, m)
    g = engine.ff_top_coefficient_polynomial(f, m)
    b = engine.expsum_oracle(g, p, 1)
    assert abs(a.value - b.value) < 1e-12


def test_max_over_characters_matches_brute_force():
    f = parse_polynomial("x^3 + 2*y^2 + x*y", XY)
    for N in (12, 25, 36, 45):
        mx = engine.max_over_characters(f, N)
        ref = max(abs(brute(f, N, u)) for u in units(N))
        assert abs(mx.magnitude - ref) < 1e-9
        assert abs(abs(engine.expsum_oracle(f, N, mx.u_max).value) - mx.magnitude) < 1e-9


def test_cap_is_a_hard_error():
    with pytest.raises(EnumerationCapExceeded):
        engine.expsum_oracle(parse_polynomial("x*y", XY), 1000, 1, cap=10**5)


def test_threads_do_not_change_results():
    f = parse_polynomial("x^3 + y^3 + x*y", XY)
    a = engine.expsum_oracle(f, 1999, 5, workers=1)
    b = engine.expsum_oracle(f, 1999, 5, workers=4)
    assert abs(a.value - b.value) < 1e-12


def test_record_fields():
    rec = engine.expsum(parse_polynomial("x^2", X), 9, 2).to_record("x^2")
    assert list(rec) == ["f", "N", "u", "re", "im", "magnitude", "err", "method", "terms"]


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 3), st.integers(0, 3)), st.integers(-9, 9), max_size=5),
       st.integers(2, 60), st.integers(1, 10**6))
def test_crt_multiplicativity(terms, N, useed):
    f = IntPolynomial(2, terms)
    us = units(N)
    u = us[useed % len(us)]
    whole = engine.expsum_oracle(f, N, u).value
    parts = [engine.expsum_oracle(f, q, c).value for q, c in engine.crt_split(N, u)]
    assert abs(np.prod(parts) - whole) < 1e-9
