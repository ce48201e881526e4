"""Sparse multivariate integer polynomials.

The polynomial ``f`` is stored as a map from exponent tuples to nonzero
Python integers, so coefficient growth under substitution never overflows.
Values are immutable once constructed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .exact import det_int, smith_diagonal
from .arith import factorize, valuation

Exponent = tuple[int, ...]

MAX_EXPONENT = 2**31


class PolynomialSyntaxError(ValueError):
    """Raised by :func:`parse_polynomial`; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class IntPolynomial:
    __slots__ = ("_nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, int] | Iterable[tuple[Exponent, int]] = ()):
        if nvars < 1:
            raise ValueError("a polynomial needs at least one variable")
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[Exponent, int] = {}
        for exp, coef in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} does not have length {nvars}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            merged[exp] = merged.get(exp, 0) + int(coef)
        self._nvars = nvars
        self._terms = MappingProxyType({e: c for e, c in merged.items() if c != 0})
        self._hash = None

    # -- basic accessors -------------------------------------------------
    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def terms(self) -> Mapping[Exponent, int]:
        return self._terms

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial reports 0."""
        return max((sum(e) for e in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def constant_term(self) -> int:
        return self._terms.get((0,) * self._nvars, 0)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def max_abs_coefficient(self) -> int:
        return max((abs(c) for c in self._terms.values()), default=0)

    def max_exponents(self) -> tuple[int, ...]:
        return tuple(max((e[i] for e in self._terms), default=0) for i in range(self._nvars))

    # -- arithmetic --------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> IntPolynomial:
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, c: int) -> IntPolynomial:
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> IntPolynomial:
        return cls(nvars, {tuple(int(j == i) for j in range(nvars)): 1})

    def _check(self, other: IntPolynomial) -> None:
        if other._nvars != self._nvars:
            raise ValueError("polynomials live in different numbers of variables")

    def __add__(self, other):
        if isinstance(other, int):
            other = IntPolynomial.constant(self._nvars, other)
        self._check(other)
        return IntPolynomial(self._nvars, list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return IntPolynomial(self._nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        if isinstance(other, int):
            other = IntPolynomial.constant(self._nvars, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return IntPolynomial(self._nvars, {e: c * other for e, c in self._terms.items()})
        self._check(other)
        out: dict[Exponent, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return IntPolynomial(self._nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = IntPolynomial.constant(self._nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        return self._nvars == other._nvars and dict(self._terms) == dict(other._terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"IntPolynomial({self._nvars}, {dict(sorted(self._terms.items()))})"

    # -- evaluation --------------------------------------------------------
    def __call__(self, *point: int) -> int:
        return evaluate(self, point)

    def render(self, var_names: Sequence[str] | None = None) -> str:
        return render_polynomial(self, var_names)


def default_var_names(n: int) -> list[str]:
    return ["x"] if n == 1 else [f"x{i + 1}" for i in range(n)]


# ---------------------------------------------------------------------------
# parsing and rendering

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        if m.group(1) is not None:
            tokens.append(("int", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            tokens.append(("name", m.group(2), m.start(2)))
        elif m.group(3) is not None:
            ch = m.group(3)
            if ch not in "+-*^()":
                raise PolynomialSyntaxError(f"unexpected character {ch!r}", m.start(3), text)
            tokens.append((ch, ch, m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, var_names: Sequence[str]):
        self.text = text
        self.index = {v: i for i, v in enumerate(var_names)}
        if len(self.index) != len(var_names):
            raise ValueError("duplicate variable names")
        self.n = len(var_names)
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self, kind=None):
        tok = self.tokens[self.k]
        if kind is not None and tok[0] != kind:
            want = "end of input" if kind == "end" else repr(kind)
            got = "end of input" if tok[0] == "end" else repr(tok[1])
            raise PolynomialSyntaxError(f"expected {want}, found {got}", tok[2], self.text)
        self.k += 1
        return tok

    def fail(self, message: str):
        raise PolynomialSyntaxError(message, self.peek()[2], self.text)

    def parse(self) -> dict[Exponent, int]:
        terms: dict[Exponent, int] = {}
        while True:
            sign = 1
            if self.peek()[0] in ("+", "-"):
                sign = -1 if self.take()[0] == "-" else 1
            exp, coef = self.term()
            terms[exp] = terms.get(exp, 0) + sign * coef
            if self.peek()[0] not in ("+", "-"):
                break
        self.take("end")
        return terms

    def term(self) -> tuple[Exponent, int]:
        if self.peek()[0] == "(":
            self.take("(")
            sign = 1
            if self.peek()[0] in ("+", "-"):
                sign = -1 if self.take()[0] == "-" else 1
            exp, coef = self.product()
            self.take(")")
            return exp, sign * coef
        return self.product()

    def product(self) -> tuple[Exponent, int]:
        exp = [0] * self.n
        coef = 1
        while True:
            tok = self.peek()
            if tok[0] == "int":
                self.take()
                coef *= int(tok[1])
                if self.peek()[0] == "^":
                    self.take()
                    coef **= self.exponent()
            elif tok[0] == "name":
                self.take()
                if tok[1] not in self.index:
                    raise PolynomialSyntaxError(f"unknown variable {tok[1]!r}", tok[2], self.text)
                e = 1
                if self.peek()[0] == "^":
                    self.take()
                    e = self.exponent()
                exp[self.index[tok[1]]] += e
                if exp[self.index[tok[1]]] > MAX_EXPONENT:
                    raise PolynomialSyntaxError("exponent overflow", tok[2], self.text)
            else:
                self.fail("expected a coefficient or variable")
            if self.peek()[0] != "*":
                return tuple(exp), coef
            self.take()

    def exponent(self) -> int:
        tok = self.take("int")
        value = int(tok[1])
        if value > MAX_EXPONENT:
            raise PolynomialSyntaxError("exponent overflow (> 2^31)", tok[2], self.text)
        return value


def parse_polynomial(text: str, var_names: Sequence[str]) -> IntPolynomial:
    """Parse ``text`` such as ``"x^2 + 2*x*y - y^2"`` over the given variables.

    Grammar: signed sums of products of integer coefficients and variables,
    each optionally raised with ``^`` to a nonnegative integer. A whole term
    product may be wrapped in parentheses. Multiplication is always explicit.
    """
    if not var_names:
        raise ValueError("at least one variable name is required")
    return IntPolynomial(len(var_names), _Parser(text, var_names).parse())


def term_order_key(exp: Exponent):
    # graded lexicographic, highest first
    return (-sum(exp), tuple(-e for e in exp))


def render_polynomial(f: IntPolynomial, var_names: Sequence[str] | None = None) -> str:
    names = list(var_names) if var_names is not None else default_var_names(f.nvars)
    if len(names) != f.nvars:
        raise ValueError("wrong number of variable names")
    if f.is_zero():
        return "0"
    parts = []
    for exp in sorted(f.terms, key=term_order_key):
        coef = f.terms[exp]
        factors = [n if e == 1 else f"{n}^{e}" for n, e in zip(names, exp) if e]
        mag = abs(coef)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(mag)] + factors)
        if not parts:
            parts.append(body if coef > 0 else "-" + body)
        else:
            parts.append(("+ " if coef > 0 else "- ") + body)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# evaluation and calculus


def evaluate(f: IntPolynomial, point: Sequence[int]) -> int:
    """Exact value of f at an integer point."""
    if len(point) != f.nvars:
        raise ValueError(f"point has {len(point)} coordinates, polynomial has {f.nvars} variables")
    total = 0
    for exp, coef in f.terms.items():
        term = coef
        for x, e in zip(point, exp):
            if e:
                term *= x**e
        total += term
    return total


def eval_mod(f: IntPolynomial, point: Sequence[int], M: int) -> int:
    """f(point) mod M with every intermediate reduced mod M."""
    if len(point) != f.nvars:
        raise ValueError(f"point has {len(point)} coordinates, polynomial has {f.nvars} variables")
    if M < 1:
        raise ValueError("modulus must be positive")
    total = 0
    for exp, coef in f.terms.items():
        term = coef % M
        for x, e in zip(point, exp):
            if e:
                term = term * pow(x % M, e, M) % M
        total = (total + term) % M
    return total


def derivative(f: IntPolynomial, i: int) -> IntPolynomial:
    out = {}
    for exp, coef in f.terms.items():
        if exp[i]:
            e = list(exp)
            e[i] -= 1
            out[tuple(e)] = coef * exp[i]
    return IntPolynomial(f.nvars, out)


def gradient(f: IntPolynomial) -> list[IntPolynomial]:
    return [derivative(f, i) for i in range(f.nvars)]


def homogeneous_part(f: IntPolynomial, k: int) -> IntPolynomial:
    return IntPolynomial(f.nvars, {e: c for e, c in f.terms.items() if sum(e) == k})


def top_form(f: IntPolynomial) -> IntPolynomial:
    """The degree-d homogeneous part f_d."""
    return homogeneous_part(f, f.degree)


def affine_substitute(f: IntPolynomial, shift: Sequence[int], T: Sequence[Sequence[int]]) -> IntPolynomial:
    """Expand g(x) = f(shift + T x) exactly. T must be nonsingular."""
    n = f.nvars
    if len(shift) != n or len(T) != n or any(len(row) != n for row in T):
        raise ValueError("shift and T must match the number of variables")
    if det_int(T) == 0:
        raise ValueError("singular substitution matrix")
    return _substitute_linear(f, shift, T)


def _substitute_linear(f: IntPolynomial, shift, T) -> IntPolynomial:
    n = f.nvars
    forms = []
    for j in range(n):
        terms = {(0,) * n: int(shift[j])}
        for k in range(n):
            if T[j][k]:
                e = [0] * n
                e[k] = 1
                terms[tuple(e)] = int(T[j][k])
        forms.append(IntPolynomial(n, terms))
    cache: dict[tuple[int, int], IntPolynomial] = {}

    def power(j: int, e: int) -> IntPolynomial:
        if (j, e) not in cache:
            cache[(j, e)] = forms[j] ** e
        return cache[(j, e)]

    acc: dict[Exponent, int] = {}
    for exp, coef in f.terms.items():
        prod = IntPolynomial.constant(n, coef)
        for j, e in enumerate(exp):
            if e:
                prod = prod * power(j, e)
        for e2, c2 in prod.terms.items():
            acc[e2] = acc.get(e2, 0) + c2
    return IntPolynomial(n, acc)


# ---------------------------------------------------------------------------
# quadratic forms


@dataclass(frozen=True)
class QuadraticDiagonalization:
    T: tuple[tuple[int, ...], ...]
    diag: tuple[int, ...]
    det: int
    # prime -> e_p when T(Z_p^n) = p^e Z_p^n, or None when T is not a box at p
    box_exponents: Mapping[int, int | None]

    @property
    def is_box(self) -> bool:
        return all(e is not None for e in self.box_exponents.values())


def _symmetric_matrix(f2: IntPolynomial) -> list[list[Fraction]]:
    """Matrix A with f2(x) = x^T A x / 2 (A is twice the Gram matrix, integral)."""
    n = f2.nvars
    A = [[Fraction(0)] * n for _ in range(n)]
    for exp, coef in f2.terms.items():
        idx = [i for i, e in enumerate(exp) for _ in range(e)]
        i, j = idx
        if i == j:
            A[i][i] += 2 * coef
        else:
            A[i][j] += coef
            A[j][i] += coef
    return A


def box_exponents(T: Sequence[Sequence[int]]) -> dict[int, int | None]:
    """For each prime dividing det T: e_p if T is p^e times a p-adic unit matrix."""
    d = det_int(T)
    if d == 0:
        raise ValueError("singular matrix")
    invariants = smith_diagonal(T)
    out: dict[int, int | None] = {}
    for p, _ in factorize(abs(d)):
        vals = {valuation(s, p) for s in invariants}
        out[p] = vals.pop() if len(vals) == 1 else None
    return out


def diagonalize_quadratic(f2: IntPolynomial) -> QuadraticDiagonalization:
    """Integral T with f2(T x) = sum_i a_i x_i^2 and det T != 0.

    Symmetric elimination over Q on twice the Gram matrix, then each column
    of the rational transform is scaled to be integral with integral image
    coefficient. A zero pivot paired with a nonzero cross term is split with
    x_k = u + v, x_j = u - v.
    """
    if not f2.is_zero() and (not f2.is_homogeneous() or f2.degree != 2):
        raise ValueError("input must be homogeneous of degree 2")
    n = f2.nvars
    A = _symmetric_matrix(f2)
    P = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def col_op(target: int, source: int, factor: Fraction) -> None:
        # column target += factor * column source, applied congruently to A
        for row in P:
            row[target] += factor * row[source]
        for row in A:
            row[target] += factor * row[source]
        for k in range(n):
            A[target][k] += factor * A[source][k]

    def swap(i: int, j: int) -> None:
        for row in P:
            row[i], row[j] = row[j], row[i]
        for row in A:
            row[i], row[j] = row[j], row[i]
        A[i], A[j] = A[j], A[i]

    for k in range(n):
        if A[k][k] == 0:
            j = next((j for j in range(k + 1, n) if A[j][j] != 0), None)
            if j is not None:
                swap(k, j)
            else:
                j = next((j for j in range(k + 1, n) if A[k][j] != 0), None)
                if j is None:
                    continue
                # (x_k, x_j) -> (u + v, u - v)
                col_op(k, j, Fraction(1))
                col_op(j, k, Fraction(-1, 2))
                for row in P:
                    row[j] *= -2
                for row in A:
                    row[j] *= -2
                A[j] = [-2 * v for v in A[j]]
        for j in range(k + 1, n):
            if A[k][j] != 0:
                col_op(j, k, -A[k][j] / A[k][k])

    T_cols = []
    diag = []
    for j in range(n):
        col = [P[i][j] for i in range(n)]
        scale = lcm(*(c.denominator for c in col))
        a = A[j][j] / 2 * scale * scale
        scale *= a.denominator
        a = A[j][j] / 2 * scale * scale
        T_cols.append([int(c * scale) for c in col])
        diag.append(int(a))
    T = tuple(tuple(T_cols[j][i] for j in range(n)) for i in range(n))
    return QuadraticDiagonalization(
        T=T,
        diag=tuple(diag),
        det=det_int(T),
        box_exponents=MappingProxyType(box_exponents(T)),
    )
