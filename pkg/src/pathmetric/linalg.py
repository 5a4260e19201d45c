"""Exact linear algebra over the rationals: Bareiss elimination and nullspaces.

Rank decisions here ARE the analysis output (kernel dimension = degree of
mobility), so everything is integer/fraction arithmetic; no floating point
anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Sequence, Tuple


def _integerize(row: Sequence[Fraction]) -> List[int]:
    lcm = 1
    for c in row:
        d = Fraction(c).denominator
        lcm = lcm * d // gcd(lcm, d)
    return [int(Fraction(c) * lcm) for c in row]


def _echelon_bareiss(m: List[List[int]]) -> Tuple[List[List[int]], List[int]]:
    """Fraction-free forward elimination.  Returns the echelon matrix and the
    pivot column of each (nonzero) leading row."""
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    pivots: List[int] = []
    r = 0
    prev = 1
    for c in range(ncols):
        pivot_row = None
        for i in range(r, nrows):
            if m[i][c] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        if pivot_row != r:
            m[r], m[pivot_row] = m[pivot_row], m[r]
        for i in range(r + 1, nrows):
            if all(v == 0 for v in m[i][c:]):
                continue
            head = m[i][c]
            for j in range(c + 1, ncols):
                m[i][j] = (m[i][j] * m[r][c] - head * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return m, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    m = [_integerize(row) for row in rows if any(Fraction(c) != 0 for c in row)]
    if not m:
        return 0
    _, pivots = _echelon_bareiss(m)
    return len(pivots)


def _primitive(vec: List[Fraction]) -> List[Fraction]:
    ints = _integerize(vec)
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g:
        ints = [v // g for v in ints]
    for v in ints:
        if v != 0:
            if v < 0:
                ints = [-w for w in ints]
            break
    return [Fraction(v) for v in ints]


def kernel_basis(rows: Sequence[Sequence[Fraction]], ncols: int) -> List[List[Fraction]]:
    """Basis of {v : M v = 0}, as primitive integer vectors (Fractions).

    Bareiss elimination on the integer-cleared rows, then exact back
    substitution for each free column.
    """
    m = [_integerize(row) for row in rows if any(Fraction(c) != 0 for c in row)]
    if not m:
        return [
            _primitive([Fraction(1) if i == j else Fraction(0) for i in range(ncols)])
            for j in range(ncols)
        ]
    m, pivots = _echelon_bareiss(m)
    pivot_set = set(pivots)
    free_cols = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for f in free_cols:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r in range(len(pivots) - 1, -1, -1):
            c = pivots[r]
            acc = Fraction(0)
            for j in range(c + 1, ncols):
                if v[j]:
                    acc += Fraction(m[r][j]) * v[j]
            v[c] = -acc / m[r][c]
        basis.append(_primitive(v))
    return basis


def in_span(vectors: Sequence[Sequence[Fraction]], candidate: Sequence[Fraction]) -> bool:
    base = [list(v) for v in vectors]
    if not base:
        return all(Fraction(c) == 0 for c in candidate)
    return rank(base + [list(candidate)]) == rank(base)
