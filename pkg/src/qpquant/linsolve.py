"""Exact linear solves over Q for sparse column data."""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def _matrix(columns: Sequence[Mapping[Hashable, Fraction]], extra: Mapping | None = None):
    rows: dict = {}
    for c in columns:
        for k in c:
            rows.setdefault(k, len(rows))
    if extra:
        for k in extra:
            rows.setdefault(k, len(rows))
    ncols = len(columns) + (1 if extra is not None else 0)
    data = [[QQ(0)] * ncols for _ in range(len(rows))]
    for j, c in enumerate(columns):
        for k, v in c.items():
            data[rows[k]][j] = QQ(v.numerator, v.denominator)
    if extra is not None:
        for k, v in extra.items():
            data[rows[k]][-1] = QQ(v.numerator, v.denominator)
    return DomainMatrix(data, (len(rows), ncols), QQ), rows


def solve(columns: Sequence[Mapping], rhs: Mapping) -> list[Fraction] | None:
    """Solution x of sum_j x_j columns[j] = rhs with free variables zero.

    Pivots are taken left to right, so earlier columns are preferred.
    Returns None if the system is inconsistent.
    """
    if not columns:
        return [] if not any(rhs.values()) else None
    M, rows = _matrix(columns, rhs)
    if not rows:
        return [Fraction(0)] * len(columns)
    R, pivots = M.rref()
    n = len(columns)
    if n in pivots:
        return None
    sol = [Fraction(0)] * n
    dense = R.to_Matrix()
    for r, p in enumerate(pivots):
        v = dense[r, n]
        sol[p] = Fraction(int(v.p), int(v.q))
    return sol


def reduce_modulo(vector: Mapping, columns: Sequence[Mapping]) -> dict:
    """Canonical representative of ``vector`` modulo the span of ``columns``."""
    if not columns:
        return {k: v for k, v in vector.items() if v}
    span, rows = _matrix(list(columns), vector)
    span = span[:, : len(columns)]
    keys = list(rows)
    # rows of the RREF of span^T form an echelon basis of the column span
    basis = span.transpose().rref()[0].to_Matrix()
    vec = {k: Fraction(vector.get(k, 0)) for k in keys}
    for i in range(basis.rows):
        row = [Fraction(int(basis[i, j].p), int(basis[i, j].q)) for j in range(basis.cols)]
        lead = next((j for j, v in enumerate(row) if v), None)
        if lead is None:
            continue
        k = keys[lead]
        c = vec[k]
        if c:
            for j, v in enumerate(row):
                if v:
                    vec[keys[j]] -= c * v
    return {k: v for k, v in vec.items() if v}


def rank(columns: Sequence[Mapping]) -> int:
    if not columns:
        return 0
    M, rows = _matrix(columns)
    if not rows:
        return 0
    return M.rank()
