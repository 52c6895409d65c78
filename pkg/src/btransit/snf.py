"""
Exact integer linear algebra: Smith normal form with unimodular transforms,
rank over GF(2), and integral solving of ``A x = b``.

Matrices are lists of lists of Python ints.
"""
from __future__ import annotations

from dataclasses import dataclass


def zeros(m, n):
    return [[0] * n for _ in range(m)]


def identity(n):
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = 1
    return out


def matmul(A, B):
    if not A:
        return []
    n = len(B[0]) if B else 0
    if not B:
        return zeros(len(A), n)
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A, x):
    return [sum(a * b for a, b in zip(row, x)) for row in A]


def transpose(A, n_rows_if_empty=0):
    if not A:
        return [[] for _ in range(n_rows_if_empty)]
    return [list(r) for r in zip(*A)]


def is_zero(A):
    return all(x == 0 for row in A for x in row)


@dataclass
class SmithForm:
    """``U @ A @ V == D`` with ``U``, ``V`` unimodular; ``Uinv``, ``Vinv``
    are their inverses.  ``diag`` lists the nonzero invariant factors, each
    dividing the next."""

    U: list
    D: list
    V: list
    Uinv: list
    Vinv: list
    diag: list

    @property
    def rank(self):
        return len(self.diag)


def smith_normal_form(A, n_cols=None) -> SmithForm:
    m = len(A)
    n = len(A[0]) if m else (n_cols or 0)
    D = [list(r) for r in A]
    U, Uinv = identity(m), identity(m)
    V, Vinv = identity(n), identity(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]
        for row in Uinv:
            row[i], row[j] = row[j], row[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def add_row(src, dst, k):
        # row_dst += k * row_src
        if k == 0:
            return
        D[dst] = [a + k * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + k * b for a, b in zip(U[dst], U[src])]
        for row in Uinv:
            row[src] -= k * row[dst]

    def add_col(src, dst, k):
        # col_dst += k * col_src
        if k == 0:
            return
        for row in D:
            row[dst] += k * row[src]
        for row in V:
            row[dst] += k * row[src]
        Vinv[src] = [a - k * b for a, b in zip(Vinv[src], Vinv[dst])]

    def negate_row(i):
        D[i] = [-a for a in D[i]]
        U[i] = [-a for a in U[i]]
        for row in Uinv:
            row[i] = -row[i]

    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero absolute value in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = D[i][j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            done = True
            p = D[t][t]
            for i in range(t + 1, m):
                if D[i][t]:
                    q = D[i][t] // p
                    add_row(t, i, -q)
                    if D[i][t]:
                        done = False
            for j in range(t + 1, n):
                if D[t][j]:
                    q = D[t][j] // p
                    add_col(t, j, -q)
                    if D[t][j]:
                        done = False
            if done:
                # divisibility of the remaining block
                bad = None
                for i in range(t + 1, m):
                    for j in range(t + 1, n):
                        if D[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is None:
                    break
                add_row(bad, t, 1)
                continue
            # move the smallest entry of row/column t to the pivot
            best = (abs(D[t][t]), t, t)
            for i in range(t + 1, m):
                if D[i][t] and abs(D[i][t]) < best[0]:
                    best = (abs(D[i][t]), i, t)
            for j in range(t + 1, n):
                if D[t][j] and abs(D[t][j]) < best[0]:
                    best = (abs(D[t][j]), t, j)
            _, i, j = best
            swap_rows(t, i)
            swap_cols(t, j)
        if D[t][t] < 0:
            negate_row(t)
        t += 1
    diag = [D[i][i] for i in range(min(m, n)) if D[i][i]]
    return SmithForm(U, D, V, Uinv, Vinv, diag)


def invariant_factors(A, n_cols=None):
    return smith_normal_form(A, n_cols).diag


def rank_mod2(A):
    rows = [[x & 1 for x in r] for r in A]
    rank = 0
    n = len(rows[0]) if rows else 0
    for col in range(n):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                rows[i] = [a ^ b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def kernel_mod2(A, n_cols):
    """Basis (list of 0/1 vectors) of the kernel of ``A`` over GF(2)."""
    rows = [[x & 1 for x in r] for r in A]
    pivots = []
    rank = 0
    for col in range(n_cols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                rows[i] = [a ^ b for a, b in zip(rows[i], rows[rank])]
        pivots.append(col)
        rank += 1
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [0] * n_cols
        v[fc] = 1
        for r, pc in enumerate(pivots):
            if rows[r][fc]:
                v[pc] = 1
        basis.append(v)
    return basis


def solve_integer(A, b, n_cols=None):
    """One integer solution ``x`` of ``A x = b`` or ``None``.

    Also returns a basis of the integer kernel: ``(x, kernel_basis)``.
    """
    m = len(A)
    n = len(A[0]) if m else (n_cols or 0)
    sf = smith_normal_form(A, n)
    c = matvec(sf.U, b)
    y = [0] * n
    r = sf.rank
    for i in range(m):
        if i < r:
            if c[i] % sf.diag[i]:
                return None, None
            y[i] = c[i] // sf.diag[i]
        elif c[i]:
            return None, None
    x = matvec(sf.V, y)
    kernel = [[sf.V[row][k] for row in range(n)] for k in range(r, n)]
    return x, kernel


def solve_mod2(A, b, n_cols):
    """One solution of ``A x = b`` over GF(2) and a kernel basis, or
    ``(None, None)``."""
    m = len(A)
    rows = [[x & 1 for x in A[i]] + [b[i] & 1] for i in range(m)]
    pivots = []
    rank = 0
    for col in range(n_cols):
        piv = next((i for i in range(rank, m) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(m):
            if i != rank and rows[i][col]:
                rows[i] = [a ^ c for a, c in zip(rows[i], rows[rank])]
        pivots.append(col)
        rank += 1
    if any(rows[i][n_cols] for i in range(rank, m)):
        return None, None
    x = [0] * n_cols
    for r, pc in enumerate(pivots):
        x[pc] = rows[r][n_cols]
    return x, kernel_mod2(A, n_cols)
