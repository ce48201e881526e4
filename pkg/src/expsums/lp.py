"""Exact rational linear programming: two-phase tableau simplex, Bland's rule.

Problems are tiny (tens of variables) so a dense Fraction tableau is fine
and the optimum is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Number = int | Fraction


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal", "infeasible", "unbounded"
    x: tuple[Fraction, ...] = ()
    objective: Fraction | None = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _pivot(tab: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    piv = tab[row][col]
    tab[row] = [v / piv for v in tab[row]]
    for i, r in enumerate(tab):
        if i != row and r[col] != 0:
            factor = r[col]
            tab[i] = [a - factor * b for a, b in zip(r, tab[row])]
    basis[row] = col


def _run(tab: list[list[Fraction]], basis: list[int], allowed: int) -> str:
    """Minimize the objective stored in the last row (reduced costs)."""
    m = len(tab) - 1
    while True:
        obj = tab[-1]
        col = next((j for j in range(allowed) if obj[j] < 0), None)
        if col is None:
            return "optimal"
        best = None
        for i in range(m):
            a = tab[i][col]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return "unbounded"
        _pivot(tab, basis, best[1], col)


def minimize(
    c: Sequence[Number],
    A_eq: Sequence[Sequence[Number]] = (),
    b_eq: Sequence[Number] = (),
    A_ub: Sequence[Sequence[Number]] = (),
    b_ub: Sequence[Number] = (),
) -> LPResult:
    """min c.x subject to A_eq x = b_eq, A_ub x <= b_ub, x >= 0 (exact)."""
    nx = len(c)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    n_slack = len(A_ub)
    for k, (row, b) in enumerate(zip(A_ub, b_ub)):
        slack = [Fraction(0)] * n_slack
        slack[k] = Fraction(1)
        rows.append([Fraction(v) for v in row] + slack)
        rhs.append(Fraction(b))
    for row, b in zip(A_eq, b_eq):
        rows.append([Fraction(v) for v in row] + [Fraction(0)] * n_slack)
        rhs.append(Fraction(b))
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    m = len(rows)
    nv = nx + n_slack
    # phase 1: one artificial per row
    tab = [rows[i] + [Fraction(int(i == j)) for j in range(m)] + [rhs[i]] for i in range(m)]
    basis = [nv + i for i in range(m)]
    obj = [Fraction(0)] * (nv + m + 1)
    for i in range(m):
        obj = [a - b for a, b in zip(obj, tab[i])]
    for j in range(nv, nv + m):
        obj[j] = Fraction(0)
    tab.append(obj)
    _run(tab, basis, nv + m)
    if tab[-1][-1] != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= nv:
            col = next((j for j in range(nv) if tab[i][j] != 0), None)
            if col is not None:
                _pivot(tab, basis, i, col)
    keep = [i for i in range(m) if basis[i] < nv]
    tab = [tab[i][:nv] + [tab[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]
    cost = [Fraction(v) for v in c] + [Fraction(0)] * n_slack
    obj = cost + [Fraction(0)]
    for i, bcol in enumerate(basis):
        if cost[bcol] != 0:
            obj = [a - cost[bcol] * b for a, b in zip(obj, tab[i])]
    tab.append(obj)
    status = _run(tab, basis, nv)
    if status != "optimal":
        return LPResult(status)
    x = [Fraction(0)] * nv
    for i, bcol in enumerate(basis):
        x[bcol] = tab[i][-1]
    value = sum((Fraction(ci) * xi for ci, xi in zip(c, x[:nx])), Fraction(0))
    return LPResult("optimal", tuple(x[:nx]), value)


def maximize(c: Sequence[Number], **kw) -> LPResult:
    res = minimize([-Fraction(v) for v in c], **kw)
    if res.ok:
        return LPResult("optimal", res.x, -res.objective)
    return res


def feasible(A_eq=(), b_eq=(), A_ub=(), b_ub=(), nvars: int | None = None) -> bool:
    if nvars is None:
        nvars = len(A_eq[0]) if A_eq else len(A_ub[0])
    return minimize([0] * nvars, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=b_ub).ok
