from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

from expsums import newton as nw
from expsums.corpus import builtin_corpus
from expsums.locus import estimate_s
from expsums.newton import Verdict
from expsums.polynomial import IntPolynomial, parse_polynomial, top_form

XY = ["x", "y"]
X4 = ["x1", "x2", "x3", "x4"]


def test_support_examples():
    assert set(nw.newton_support(parse_polynomial("x1*x2 + x3*x4", X4))) == {(1, 1, 0, 0), (0, 0, 1, 1)}
    assert set(nw.newton_support(parse_polynomial("x^3 + y^3 + x*y + 5", XY))) == {(3, 0), (0, 3), (1, 1)}
    assert nw.newton_support(parse_polynomial("x", ["x"])) == [(1,)]
    with pytest.raises(ValueError):
        nw.newton_support(IntPolynomial.constant(2, 7))


def test_sigma_examples():
    assert nw.compute_sigma(nw.newton_support(parse_polynomial("x1^3 + x2^3 + x3^3 + x4^3", X4))) == Fraction(4, 3)
    assert nw.compute_sigma([(1, 1, 0, 0), (0, 0, 1, 1)]) == 2
    assert nw.compute_sigma([(3, 0), (0, 3), (1, 1)]) == 1
    with pytest.raises(ValueError):
        nw.compute_sigma([])


def test_diagonal_faces_examples():
    _, k = nw.diagonal_faces([(3, 0), (0, 3)], Fraction(2, 3))
    assert k == 1
    faces, k = nw.diagonal_faces([(1, 1, 0, 0), (0, 0, 1, 1)], Fraction(2))
    assert k == 3
    smallest = min(faces, key=lambda F: F.dim)
    assert smallest.dim == 1 and set(smallest.points) == {(1, 1, 0, 0), (0, 0, 1, 1)}
    _, k = nw.diagonal_faces([(1, 1)], Fraction(1))
    assert k == 2


def _random_supports(n, count, seed):
    rng = random.Random(seed)
    for _ in range(count):
        k = rng.randint(1, 5)
        pts = {tuple(rng.randint(0, 4) for _ in range(n)) for _ in range(k)}
        pts.discard(tuple([0] * n))
        if pts:
            yield sorted(pts)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sigma_three_routes(n):
    for support in _random_supports(n, 40, n):
        s = nw.compute_sigma(support)
        assert s == nw.sigma_by_vertex_enumeration(support)
        grid, _ = nw.sigma_by_grid(support)
        assert abs(grid - float(s)) < 0.05
        # the grid overestimates 1/sigma, so it underestimates sigma
        assert grid <= float(s) + 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_kappa_routes_agree(n):
    for support in _random_supports(n, 30, 10 + n):
        s = nw.compute_sigma(support)
        _, k = nw.diagonal_faces(support, s)
        assert k == nw.kappa_from_normal_cone(support, s)[0] == nw.kappa_from_representations(support, s)
        assert 1 <= k <= n


def test_sigma_permutation_invariant():
    support = [(3, 1, 0), (0, 2, 2), (1, 0, 5)]
    s = nw.compute_sigma(support)
    for perm in itertools.permutations(range(3)):
        assert nw.compute_sigma([tuple(v[i] for i in perm) for v in support]) == s


def test_face_polynomial_improper_face_recovers_f():
    f = parse_polynomial("x^3 + y^3 + x*y + 5", XY)
    faces = nw.all_faces(nw.newton_support(f))
    improper = [F for F in faces if not F.is_proper]
    assert len(improper) == 1
    g = nw.face_polynomial(f, improper[0])
    assert g + IntPolynomial.constant(2, 5) == f
    top = [F for F in faces if F.is_proper and F.is_compact and len(F.points) == 2]
    assert top, "expected a compact edge"


def test_nondegeneracy_examples():
    assert nw.check_nondegenerate(parse_polynomial("x^3 + y^3 + x*y", XY)) is Verdict.CERTIFIED_DEGENERATE
    assert nw.check_nondegenerate(parse_polynomial("x1*x2 + x3*x4", X4)) is Verdict.CERTIFIED_NONDEGENERATE
    assert nw.check_nondegenerate(parse_polynomial("x^2", ["x"])) is Verdict.CERTIFIED_NONDEGENERATE


def test_torus_search_agrees_with_exact_route():
    g = parse_polynomial("x^3 + y^3 + x*y", XY)
    assert nw.torus_critical_points_mod_p(g, 10007) > 0
    v, method = nw.check_face(parse_polynomial("x^2 + x*y + y^2", XY), exact=False, primes=(101, 103))
    assert v is Verdict.HEURISTIC_NONDEGENERATE and method.startswith("torus")


@pytest.mark.parametrize("entry", builtin_corpus(), ids=lambda e: e.id)
def test_corpus_annotations(entry):
    nd = nw.newton_data(entry.polynomial)
    assert nd.sigma == entry.sigma
    assert nd.kappa == entry.kappa
    assert nd.nondegenerate.value == entry.nondegeneracy
    if entry.d >= 3:
        assert nd.sigma >= Fraction(entry.n - entry.s, entry.d)


def test_smooth_forms_sigma_n_over_d():
    for n in range(1, 7):
        for d in (3, 4, 5):
            names = [f"x{i}" for i in range(1, n + 1)]
            f = parse_polynomial(" + ".join(f"{v}^{d}" for v in names), names)
            s = nw.compute_sigma(nw.newton_support(f))
            assert s == Fraction(n, d)
            if n >= 2:
                _, k = nw.diagonal_faces(nw.newton_support(f), s)
                assert k == 1
