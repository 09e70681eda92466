"""Rational linear algebra used for exact certificates.

Matrices are lists of lists of ``Fraction``. Everything here is plain Python
so results are exact and reproducible; sizes in this package stay below ~100.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fractions(rows: Sequence[Sequence]) -> Matrix:
    out = []
    for row in rows:
        new = []
        for v in row:
            if isinstance(v, float):
                raise TypeError("refusing implicit float -> Fraction conversion")
            new.append(Fraction(v))
        out.append(new)
    return out


def transpose(m: Matrix) -> Matrix:
    if not m:
        return []
    return [list(col) for col in zip(*m)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def row_echelon(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and the pivot columns."""
    a = [row[:] for row in m]
    if not a:
        return a, []
    rows, cols = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(m: Matrix) -> int:
    return len(row_echelon(m)[1])


def nullspace(m: Matrix, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {v : m v = 0}."""
    if not m:
        n = ncols or 0
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    n = len(m[0])
    rref, pivots = row_echelon(m)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, p in enumerate(pivots):
            v[p] = -rref[r][f]
        basis.append(v)
    return basis


def determinant(m: Matrix) -> Fraction:
    n = len(m)
    if n == 0:
        return Fraction(1)
    a = [row[:] for row in m]
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        inv = 1 / a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


def congruence_diagonalize(s: Matrix) -> tuple[list[Fraction], Matrix]:
    """Symmetric Gaussian elimination by congruence.

    Returns ``(diag, P)`` with ``P`` invertible and ``P^T s P = diag(diag)``.
    Columns of ``P`` are the new basis vectors.
    """
    n = len(s)
    a = [row[:] for row in s]
    for i in range(n):
        for j in range(i):
            if a[i][j] != a[j][i]:
                raise ValueError(f"matrix not symmetric at ({i}, {j})")
    p = identity(n)

    def add_col(src: int, dst: int, f: Fraction) -> None:
        # basis change e_dst += f * e_src, applied on both sides
        for r in range(n):
            a[r][dst] += f * a[r][src]
        for c in range(n):
            a[dst][c] += f * a[src][c]
        for r in range(n):
            p[r][dst] += f * p[r][src]

    def swap(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in p:
            row[i], row[j] = row[j], row[i]

    for k in range(n):
        if a[k][k] == 0:
            piv = next((i for i in range(k + 1, n) if a[i][i] != 0), None)
            if piv is not None:
                swap(k, piv)
            else:
                off = next((i for i in range(k + 1, n) if a[k][i] != 0), None)
                if off is None:
                    continue  # row k is already zero
                # all remaining diagonals vanish, so this makes a[k][k] = 2 a[k][off]
                add_col(off, k, Fraction(1))
        d = a[k][k]
        for i in range(k + 1, n):
            if a[k][i] != 0:
                add_col(k, i, -a[k][i] / d)
    return [a[i][i] for i in range(n)], p


def signature(s: Matrix) -> tuple[int, int, int]:
    """(positive, negative, zero) inertia counts of a symmetric rational matrix."""
    diag, _ = congruence_diagonalize(s)
    return (
        sum(1 for d in diag if d > 0),
        sum(1 for d in diag if d < 0),
        sum(1 for d in diag if d == 0),
    )


def is_diagonal(m: Matrix) -> bool:
    return all(m[i][j] == 0 for i in range(len(m)) for j in range(len(m)) if i != j)
