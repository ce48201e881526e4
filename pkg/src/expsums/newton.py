"""Newton polyhedron at zero: sigma_f, faces through the diagonal point, kappa,
face polynomials and the non-degeneracy verdict.

Delta_0(f) = Conv(Supp(f - f(0))) + R_{>=0}^n. All geometry is exact
(Fractions); faces are enumerated from facet normals found as
one-dimensional null spaces of tight constraint sets.
"""

from __future__ import annotations

import itertools
import math
import signal
import threading
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels, lp
from .arith import is_prime
from .exact import nullspace, primitive_integer_vector, rank
from .polynomial import IntPolynomial, gradient, render_polynomial

Point = tuple[int, ...]

DEFAULT_TORUS_PRIMES = (10007, 10009, 31013)
DEFAULT_TORUS_BUDGET = 2_000_000
GROEBNER_MAX_VARS = 4


class Verdict(str, Enum):
    CERTIFIED_NONDEGENERATE = "certified_nondegenerate"
    CERTIFIED_DEGENERATE = "certified_degenerate"
    HEURISTIC_NONDEGENERATE = "heuristic_nondegenerate"
    UNKNOWN = "unknown"


def newton_support(f: IntPolynomial) -> list[Point]:
    """Exponent vectors of the nonconstant terms, sorted."""
    zero = tuple([0] * f.nvars)
    supp = sorted(e for e in f.terms if e != zero)
    if not supp:
        raise ValueError("f - f(0) is zero; the Newton polyhedron is undefined")
    return supp


# ---------------------------------------------------------------------------
# sigma


def compute_sigma(support: Sequence[Point]) -> Fraction:
    """sigma_f = 1 / t* with t* = min over Conv(support) of the max coordinate.

    LP in (lambda_1..lambda_k, t): minimize t with sum lambda_j v_j <= t,
    sum lambda_j = 1, lambda, t >= 0.
    """
    if not support:
        raise ValueError("empty support")
    n = len(support[0])
    k = len(support)
    c = [0] * k + [1]
    A_ub = [[v[i] for v in support] + [-1] for i in range(n)]
    b_ub = [0] * n
    A_eq = [[1] * k + [0]]
    res = lp.minimize(c, A_eq=A_eq, b_eq=[1], A_ub=A_ub, b_ub=b_ub)
    if not res.ok or res.objective <= 0:
        raise ValueError(f"sigma LP failed: {res.status}")
    return 1 / res.objective


def _solve_square(rows: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction] | None:
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    ns = nullspace(aug, len(aug[0]))
    # unique solution iff the null space of [A | b] is one-dimensional with last entry != 0
    if len(ns) != 1 or ns[0][-1] == 0:
        return None
    v = ns[0]
    return [-x / v[-1] for x in v[:-1]]


def sigma_by_vertex_enumeration(support: Sequence[Point]) -> Fraction:
    """Independent exact check of sigma through the dual problem.

    t* = max over w in the simplex of min_j w.v_j. The optimum sits at a
    vertex of {(w, z): z <= w.v_j, w >= 0, sum w = 1}; every vertex makes n
    of these inequalities tight, so all candidate n-subsets are solved.
    """
    n = len(support[0])
    cons = [("pt", v) for v in support] + [("coord", i) for i in range(n)]
    best: Fraction | None = None
    for combo in itertools.combinations(cons, n):
        rows = [[Fraction(1)] * n + [Fraction(0)]]
        rhs = [Fraction(1)]
        for kind, data in combo:
            if kind == "pt":
                rows.append([Fraction(x) for x in data] + [Fraction(-1)])
            else:
                rows.append([Fraction(int(i == data)) for i in range(n)] + [Fraction(0)])
            rhs.append(Fraction(0))
        sol = _solve_square(rows, rhs)
        if sol is None:
            continue
        w, z = sol[:n], sol[n]
        if any(x < 0 for x in w):
            continue
        if any(sum(wi * vi for wi, vi in zip(w, v)) < z for v in support):
            continue
        if best is None or z > best:
            best = z
    if best is None or best <= 0:
        raise ValueError("no feasible dual vertex")
    return 1 / best


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def sigma_by_grid(support: Sequence[Point], max_points: int = 200_000) -> tuple[float, float]:
    """Float check: minimize the max coordinate over a barycentric grid.

    Returns (sigma estimate, resolution r). The grid value of 1/sigma
    overshoots the true one by at most max|v| / r.
    """
    pts = np.asarray(support, dtype=float)
    k = len(pts)
    r = 1
    while math.comb(r + k, k - 1) <= max_points and r < 240:
        r += 1
    weights = np.array(list(_compositions(r, k)), dtype=float) / r
    best = float((weights @ pts).max(axis=1).min())
    return 1 / best, float(r)


# ---------------------------------------------------------------------------
# faces of Delta_0


@dataclass(frozen=True)
class Face:
    """Face {a in Delta_0 : k.a = min_{Delta_0} k.a}.

    ``normal`` is a nonnegative integer functional (all zeros for the
    improper face), ``points`` the tight support points and ``rays`` the
    recession directions e_i with k_i = 0.
    """

    normal: tuple[int, ...]
    points: tuple[Point, ...]
    rays: tuple[int, ...]
    dim: int

    @property
    def is_proper(self) -> bool:
        return any(self.normal)

    @property
    def is_compact(self) -> bool:
        return not self.rays

    def contains(self, q: Sequence[Fraction]) -> bool:
        """q in Delta_0 lies in the face iff it attains the minimum of k."""
        if not self.is_proper:
            return True
        level = sum(Fraction(k) * x for k, x in zip(self.normal, self.points[0]))
        return sum(Fraction(k) * x for k, x in zip(self.normal, q)) == level

    def to_record(self) -> dict:
        return {
            "normal": list(self.normal),
            "points": [list(p) for p in self.points],
            "rays": list(self.rays),
            "dim": self.dim,
        }


def _face_dimension(points: Sequence[Point], rays: Sequence[int], n: int) -> int:
    vecs = [[Fraction(a - b) for a, b in zip(p, points[0])] for p in points[1:]]
    vecs += [[Fraction(int(i == r)) for i in range(n)] for r in rays]
    return rank(vecs) if vecs else 0


def _face_of(normal: Sequence[int], support: Sequence[Point]) -> Face:
    n = len(support[0])
    levels = [sum(k * x for k, x in zip(normal, v)) for v in support]
    lo = min(levels)
    pts = tuple(v for v, lv in zip(support, levels) if lv == lo)
    rays = tuple(i for i in range(n) if normal[i] == 0)
    return Face(tuple(normal), pts, rays, _face_dimension(pts, rays, n))


def facets(support: Sequence[Point]) -> list[Face]:
    """Facets of Delta_0; every facet normal is nonnegative and is cut out
    by n-1 independent tight directions (point differences or rays)."""
    n = len(support[0])
    if n == 1:
        return [_face_of((1,), support)]
    dirs = [[Fraction(a - b) for a, b in zip(p, q)] for p, q in itertools.combinations(support, 2)]
    dirs += [[Fraction(int(i == r)) for i in range(n)] for r in range(n)]
    found: dict[tuple[int, ...], Face] = {}
    for combo in itertools.combinations(dirs, n - 1):
        ns = nullspace(list(combo), n)
        if len(ns) != 1:
            continue
        k = primitive_integer_vector(ns[0])
        if all(x <= 0 for x in k):
            k = tuple(-x for x in k)
        if any(x < 0 for x in k) or k in found:
            continue
        face = _face_of(k, support)
        if face.dim == n - 1:
            found[k] = face
    return sorted(found.values(), key=lambda F: F.normal)


def all_faces(support: Sequence[Point], include_improper: bool = True) -> list[Face]:
    """Every nonempty face of Delta_0: intersections of facets, plus Delta_0 itself."""
    n = len(support[0])
    base = facets(support)
    by_key: dict[tuple, Face] = {}
    for F in base:
        by_key[(F.points, F.rays)] = F
    frontier = list(base)
    while frontier:
        nxt = []
        for F in frontier:
            for G in base:
                pts = tuple(p for p in F.points if p in G.points)
                if not pts:
                    continue
                normal = tuple(a + b for a, b in zip(F.normal, G.normal))
                H = _face_of(normal, support)
                key = (H.points, H.rays)
                if key not in by_key:
                    by_key[key] = H
                    nxt.append(H)
        frontier = nxt
    faces = sorted(by_key.values(), key=lambda F: (-F.dim, F.normal))
    if include_improper:
        full = Face(tuple([0] * n), tuple(support), tuple(range(n)), n)
        faces.insert(0, full)
    return faces


def hull_vertices(support: Sequence[Point]) -> list[Point]:
    """Vertices of Conv(support): points not in the hull of the others."""
    out = []
    n = len(support[0])
    for j, v in enumerate(support):
        others = [w for i, w in enumerate(support) if i != j]
        if not others:
            out.append(v)
            continue
        A_eq = [[w[i] for w in others] for i in range(n)] + [[1] * len(others)]
        b_eq = list(v) + [1]
        if not lp.feasible(A_eq=A_eq, b_eq=b_eq, nvars=len(others)):
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# faces through the diagonal point and kappa


def diagonal_point(sigma: Fraction, n: int) -> tuple[Fraction, ...]:
    return tuple([1 / Fraction(sigma)] * n)


def normal_cone_rays(support: Sequence[Point], q: Sequence[Fraction]) -> list[tuple[int, ...]]:
    """Extreme rays of {k >= 0 : k.(v_j - q) >= 0 for all j}."""
    n = len(q)
    cons = [[Fraction(x) - qi for x, qi in zip(v, q)] for v in support]
    cons += [[Fraction(int(i == r)) for i in range(n)] for r in range(n)]
    if n == 1:
        candidates = [[Fraction(1)]]
    else:
        candidates = []
        for combo in itertools.combinations(cons, n - 1):
            ns = nullspace(list(combo), n)
            if len(ns) == 1:
                candidates.append(ns[0])
                candidates.append([-x for x in ns[0]])
    rays = set()
    for k in candidates:
        if all(sum(a * b for a, b in zip(c, k)) >= 0 for c in cons) and any(k):
            rays.add(primitive_integer_vector(k))
    return sorted(rays)


def kappa_from_normal_cone(support: Sequence[Point], sigma: Fraction) -> tuple[int, Face]:
    """kappa = n - dim of the smallest face containing q.

    A functional in the relative interior of the normal cone at q (the sum
    of its extreme rays) cuts out exactly that smallest face.
    """
    n = len(support[0])
    q = diagonal_point(sigma, n)
    rays = normal_cone_rays(support, q)
    if not rays:
        raise ValueError("q is interior to Delta_0; sigma is inconsistent")
    k = tuple(sum(r[i] for r in rays) for i in range(n))
    face = _face_of(k, support)
    return n - face.dim, face


def kappa_from_representations(support: Sequence[Point], sigma: Fraction) -> int:
    """Independent route: a generator (support point or ray e_i) lies in the
    smallest face through q iff it carries positive weight in some
    representation q = sum mu_j v_j + sum nu_i e_i, sum mu = 1, mu, nu >= 0."""
    n = len(support[0])
    q = diagonal_point(sigma, n)
    k = len(support)
    A_eq = [[v[i] for v in support] + [int(i == r) for r in range(n)] for i in range(n)]
    A_eq.append([1] * k + [0] * n)
    b_eq = list(q) + [1]
    # every weight is bounded (mu_j <= 1, nu_i <= q_i), so this cap only keeps the LP bounded
    bound = 1 + max(q)
    active_pts, active_rays = [], []
    for j in range(k + n):
        c = [0] * (k + n)
        c[j] = 1
        A_ub = [[int(i == j) for i in range(k + n)]]
        res = lp.maximize(c, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=[bound])
        if not res.ok:
            raise ValueError("q is not in Delta_0")
        if res.objective > 0:
            if j < k:
                active_pts.append(support[j])
            else:
                active_rays.append(j - k)
    return n - _face_dimension(active_pts, active_rays, n)


def diagonal_faces(support: Sequence[Point], sigma: Fraction) -> tuple[list[Face], int]:
    """Proper faces of Delta_0 containing q = (1/sigma, ..., 1/sigma), and kappa."""
    n = len(support[0])
    q = diagonal_point(sigma, n)
    faces = [F for F in all_faces(support, include_improper=False) if F.contains(q)]
    if not faces:
        raise ValueError("q lies on no proper face")
    kappa = n - min(F.dim for F in faces)
    return faces, kappa


def face_polynomial(f: IntPolynomial, face: Face | Iterable[Point]) -> IntPolynomial:
    pts = face.points if isinstance(face, Face) else tuple(face)
    missing = [p for p in pts if p not in f.terms]
    if missing:
        raise ValueError(f"face points {missing} are not in Supp(f)")
    return IntPolynomial(f.nvars, {p: f.terms[p] for p in pts})


# ---------------------------------------------------------------------------
# non-degeneracy


def _disjoint_variables(g: IntPolynomial) -> bool:
    seen: set[int] = set()
    for exp in g.terms:
        vars_ = {i for i, e in enumerate(exp) if e}
        if vars_ & seen:
            return False
        seen |= vars_
    return True


class _Timeout(Exception):
    pass


def _torus_critical_exact(g: IntPolynomial, timeout: float | None) -> bool | None:
    """Exact test for a critical point of g in (C^*)^n.

    The ideal (dg/dx_1, ..., dg/dx_n, 1 - z x_1 ... x_n) is the unit ideal
    iff there is none (Nullstellensatz). Returns None on timeout.
    """
    import sympy

    n = g.nvars
    xs = sympy.symbols(f"x0:{n}")
    z = sympy.Symbol("z_")

    def to_expr(h: IntPolynomial):
        return sum((c * sympy.Mul(*[x**e for x, e in zip(xs, exp)]) for exp, c in h.terms.items()), sympy.Integer(0))

    gens = [to_expr(h) for h in gradient(g) if not h.is_zero()]
    gens.append(1 - z * sympy.Mul(*xs))
    use_alarm = timeout is not None and threading.current_thread() is threading.main_thread() and hasattr(signal, "SIGALRM")
    if use_alarm:
        def handler(signum, frame):
            raise _Timeout()
        old = signal.signal(signal.SIGALRM, handler)
        signal.setitimer(signal.ITIMER_REAL, timeout)
    try:
        basis = sympy.groebner(gens, *xs, z, order="grevlex")
    except _Timeout:
        return None
    finally:
        if use_alarm:
            signal.setitimer(signal.ITIMER_REAL, 0)
            signal.signal(signal.SIGALRM, old)
    return not (len(basis.exprs) == 1 and basis.exprs[0] == 1)


def torus_critical_points_mod_p(g: IntPolynomial, p: int, workers: int = 1) -> int:
    n = g.nvars
    axes = [np.arange(1, p, dtype=np.int64) for _ in range(n)]
    return kernels.count_common_zeros(gradient(g), p, axes, workers)


def _torus_primes(primes: Sequence[int], n: int, budget: int) -> list[int]:
    ok = [p for p in primes if (p - 1) ** n <= budget]
    if ok:
        return ok
    # shrink to primes whose torus fits the budget
    top = int(budget ** (1 / n))
    out = []
    p = top
    while p > 2 and len(out) < 3:
        if is_prime(p):
            out.append(p)
        p -= 1
    return out


@dataclass(frozen=True)
class FaceCheck:
    face: Face
    polynomial: str
    verdict: Verdict
    method: str

    def to_record(self) -> dict:
        return {"face": self.face.to_record(), "f_tau": self.polynomial, "verdict": self.verdict.value, "method": self.method}


def check_face(
    g: IntPolynomial,
    primes: Sequence[int] = DEFAULT_TORUS_PRIMES,
    budget: int = DEFAULT_TORUS_BUDGET,
    exact: bool = True,
    timeout: float | None = 20.0,
) -> tuple[Verdict, str]:
    """Does the face polynomial g avoid critical points in the torus?"""
    if _disjoint_variables(g):
        return Verdict.CERTIFIED_NONDEGENERATE, "disjoint-variables"
    if exact and g.nvars <= GROEBNER_MAX_VARS:
        has_point = _torus_critical_exact(g, timeout)
        if has_point is not None:
            if has_point:
                return Verdict.CERTIFIED_DEGENERATE, "groebner"
            return Verdict.CERTIFIED_NONDEGENERATE, "groebner"
    sampled = _torus_primes(primes, g.nvars, budget)
    if not sampled:
        return Verdict.UNKNOWN, "budget"
    hits = [p for p in sampled if torus_critical_points_mod_p(g, p) > 0]
    if not hits:
        return Verdict.HEURISTIC_NONDEGENERATE, "torus-search:" + ",".join(map(str, sampled))
    if len(hits) == len(sampled):
        # points over every sampled prime: likely degenerate, but not certified
        return Verdict.UNKNOWN, "torus-points:" + ",".join(map(str, hits))
    return Verdict.UNKNOWN, "torus-mixed:" + ",".join(map(str, hits))


_RANK = {
    Verdict.CERTIFIED_NONDEGENERATE: 0,
    Verdict.HEURISTIC_NONDEGENERATE: 1,
    Verdict.UNKNOWN: 2,
    Verdict.CERTIFIED_DEGENERATE: 3,
}


def check_nondegenerate(
    f: IntPolynomial,
    primes: Sequence[int] = DEFAULT_TORUS_PRIMES,
    budget: int = DEFAULT_TORUS_BUDGET,
    *,
    exact: bool = True,
    timeout: float | None = 20.0,
    with_details: bool = False,
):
    """Non-degeneracy of f with respect to Delta_0(f), checked face by face.

    Every face (the improper one included) must have a face polynomial
    without critical points in the torus. The overall verdict is the worst
    per-face verdict; a certified degenerate face settles it.
    """
    support = newton_support(f)
    checks = []
    for face in all_faces(support, include_improper=True):
        g = face_polynomial(f, face)
        verdict, method = check_face(g, primes, budget, exact, timeout)
        checks.append(FaceCheck(face, render_polynomial(g), verdict, method))
        if verdict is Verdict.CERTIFIED_DEGENERATE:
            break
    overall = max((c.verdict for c in checks), key=_RANK.__getitem__)
    return (overall, checks) if with_details else overall


# ---------------------------------------------------------------------------
# bundle


def fraction_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class NewtonData:
    support: tuple[Point, ...]
    hull_vertices: tuple[Point, ...]
    sigma: Fraction
    kappa: int
    diagonal_faces: tuple[Face, ...]
    nondegenerate: Verdict
    face_checks: tuple[FaceCheck, ...] = ()

    @property
    def diagonal_point(self) -> tuple[Fraction, ...]:
        return diagonal_point(self.sigma, len(self.support[0]))

    def to_record(self) -> dict:
        return {
            "support": [list(v) for v in self.support],
            "hull_vertices": [list(v) for v in self.hull_vertices],
            "sigma": fraction_str(self.sigma),
            "diagonal_point": [fraction_str(x) for x in self.diagonal_point],
            "kappa": self.kappa,
            "verdict": self.nondegenerate.value,
            "faces": [F.to_record() for F in self.diagonal_faces],
            "face_checks": [c.to_record() for c in self.face_checks],
        }


def newton_data(f: IntPolynomial, *, nondegeneracy: bool = True, **kw) -> NewtonData:
    support = newton_support(f)
    sigma = compute_sigma(support)
    faces, kappa = diagonal_faces(support, sigma)
    if nondegeneracy:
        verdict, checks = check_nondegenerate(f, with_details=True, **kw)
    else:
        verdict, checks = Verdict.UNKNOWN, []
    return NewtonData(tuple(support), tuple(hull_vertices(support)), sigma, kappa, tuple(faces), verdict, tuple(checks))
