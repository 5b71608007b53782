"""Exact dense linear algebra over the rationals.

Matrices are lists of rows of Fraction.  Everything here is elementary
Gaussian elimination; ranks are additionally available through a
fraction-free Bareiss elimination on integer-scaled matrices so the two
pipelines can cross-check each other in tests.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list[Fraction]]


def mat(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def zeros(n: int, m: int) -> Matrix:
    return [[Fraction(0)] * m for _ in range(n)]


def identity(n: int) -> Matrix:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    if a and b and len(a[0]) != len(b):
        raise ValueError("shape mismatch")
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = zeros(rows, cols)
    for i in range(rows):
        ai = a[i]
        for k in range(inner):
            c = ai[k]
            if not c:
                continue
            bk = b[k]
            oi = out[i]
            for j in range(cols):
                if bk[j]:
                    oi[j] += c * bk[j]
    return out


def mat_vec(a: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((row[j] * v[j] for j in range(len(v)) if v[j]), Fraction(0)) for row in a]


def transpose(a: Matrix) -> Matrix:
    if not a:
        return []
    return [list(col) for col in zip(*a)]


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot column indices."""
    m = [row[:] for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[1])


def bareiss_rank(a: Matrix) -> int:
    """Rank via fraction-free elimination on an integer-scaled copy."""
    if not a or not a[0]:
        return 0
    m: list[list[int]] = []
    for row in a:
        den = 1
        for x in row:
            den = den * x.denominator // gcd(den, x.denominator)
        m.append([int(x * den) for x in row])
    rows, cols = len(m), len(m[0])
    r = 0
    prev = 1
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i][c]), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        for i in range(r + 1, rows):
            for j in range(c + 1, cols):
                m[i][j] = (m[i][j] * m[r][c] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
        if r == rows:
            break
    return r


def kernel_basis(a: Matrix, cols: int | None = None) -> list[list[Fraction]]:
    """Basis of the right kernel of a (as column vectors, one list per vector)."""
    if not a:
        n = cols or 0
        return [[Fraction(1) if i == j else Fraction(0) for i in range(n)] for j in range(n)]
    red, pivots = rref(a)
    n = len(a[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve(a: Matrix, b: Sequence[Fraction]) -> list[Fraction] | None:
    """One solution of a x = b, or None if inconsistent."""
    if not a:
        return [] if all(not x for x in b) else None
    aug = [row[:] + [Fraction(b[i])] for i, row in enumerate(a)]
    red, pivots = rref(aug)
    n = len(a[0])
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for r, pc in enumerate(pivots):
        x[pc] = red[r][n]
    return x


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("inverse of a non-square matrix")
    if n == 0:
        return []
    aug = [row[:] + identity(n)[i] for i, row in enumerate(a)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in red]


def right_inverse(a: Matrix) -> Matrix | None:
    """W with a @ W = identity, if a has full row rank."""
    rows = len(a)
    if rows == 0:
        return []
    cols = len(a[0])
    wt = []
    for i in range(rows):
        e = [Fraction(1) if j == i else Fraction(0) for j in range(rows)]
        col = solve(a, e)
        if col is None:
            return None
        wt.append(col)
    # wt holds W's columns; transpose into rows
    return [[wt[j][i] for j in range(rows)] for i in range(cols)]


def solve_upper_unitriangular(a: Matrix, b: Sequence[Fraction]) -> list[Fraction]:
    """Back substitution for unit upper triangular a."""
    n = len(a)
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(b[i])
        for j in range(i + 1, n):
            if a[i][j]:
                s -= a[i][j] * x[j]
        x[i] = s
    return x
