"""
Exact two-phase simplex over the rationals (Bland's rule, dense tableau).

sympy's ``linprog`` was tried first but reports feasible optima for some
infeasible systems with equality rows, so the cone code uses this.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class LPResult:
    status: str          # "optimal", "infeasible" or "unbounded"
    value: Fraction | None = None
    x: tuple | None = None


def _pivot(T, basis, r, c):
    piv = T[r][c]
    T[r] = [v / piv for v in T[r]]
    for i, row in enumerate(T):
        if i != r and row[c]:
            f = row[c]
            T[i] = [a - f * b for a, b in zip(row, T[r])]
    basis[r] = c


def _run(T, basis, n_cols, allowed):
    """Minimise the objective in the last row of ``T`` over columns in
    ``allowed``; returns False when unbounded."""
    m = len(T) - 1
    while True:
        obj = T[m]
        col = next((j for j in range(n_cols) if j in allowed and obj[j] < 0), None)
        if col is None:
            return True
        best = None
        for i in range(m):
            a = T[i][col]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return False
        _pivot(T, basis, best[1], col)


def minimize(c, A_ub=(), b_ub=(), A_eq=(), b_eq=()) -> LPResult:
    """Minimise ``c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``,
    ``x >= 0``; all data exact (ints or Fractions)."""
    n = len(c)
    rows = [([Fraction(v) for v in a], Fraction(b), True) for a, b in zip(A_ub, b_ub)]
    rows += [([Fraction(v) for v in a], Fraction(b), False) for a, b in zip(A_eq, b_eq)]
    m = len(rows)
    n_slack = sum(1 for r in rows if r[2])
    n_total = n + n_slack + m          # structural, slack, artificial
    T, basis = [], []
    s = 0
    for i, (a, b, ub) in enumerate(rows):
        row = a + [Fraction(0)] * (n_slack + m) + [b]
        if ub:
            row[n + s] = Fraction(1)
            s += 1
        if b < 0:
            row = [-v for v in row]
        row[n + n_slack + i] = Fraction(1)
        T.append(row)
        basis.append(n + n_slack + i)
    # phase 1: minimise the sum of artificials
    obj = [Fraction(0)] * (n_total + 1)
    for row in T:
        for j in range(n + n_slack):
            obj[j] -= row[j]
        obj[-1] -= row[-1]
    T.append(obj)
    _run(T, basis, n_total, set(range(n_total)))
    if T[-1][-1] != 0:
        return LPResult("infeasible")
    # drive remaining artificials out of the basis
    art = set(range(n + n_slack, n_total))
    for i in range(m):
        if basis[i] in art:
            col = next((j for j in range(n + n_slack) if T[i][j] != 0), None)
            if col is not None:
                _pivot(T, basis, i, col)
    # phase 2
    obj = [Fraction(v) for v in c] + [Fraction(0)] * (n_total - n) + [Fraction(0)]
    for i in range(m):
        if obj[basis[i]]:
            f = obj[basis[i]]
            obj = [a - f * b for a, b in zip(obj, T[i])]
    T[-1] = obj
    if not _run(T, basis, n_total, set(range(n + n_slack))):
        return LPResult("unbounded")
    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][-1]
    return LPResult("optimal", -T[-1][-1], tuple(x))
