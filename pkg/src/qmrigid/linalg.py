"""Sparse Gauss-Jordan elimination over Q(q).

Rows are dicts ``key -> Scalar`` meaning ``sum row[key] * key = 0``.  Keys
listed as *unknowns* are eliminated; every other key is a symbolic
right-hand-side column (a parameter), carried along untouched.  This lets
one elimination serve many right-hand sides at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Sequence

from .qfield import Scalar

Row = Dict[Hashable, Scalar]


def _axpy(row: Row, c: Scalar, other: Row) -> None:
    """row -= c * other, dropping zeros."""
    for k, v in other.items():
        t = row.get(k)
        if t is None:
            row[k] = -(c * v)
        else:
            t = t - c * v
            if t.is_zero():
                del row[k]
            else:
                row[k] = t


@dataclass
class Echelon:
    unknowns: List[Hashable]
    pivots: Dict[Hashable, Row] = field(default_factory=dict)
    constraints: List[Row] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def free(self) -> List[Hashable]:
        return [u for u in self.unknowns if u not in self.pivots]

    def solution(self, pivot: Hashable) -> Row:
        """``pivot = sum coeff * key`` over free unknowns and parameter keys."""
        row = self.pivots[pivot]
        return {k: -v for k, v in row.items() if k != pivot}


def eliminate(rows: Iterable[Row], unknowns: Sequence[Hashable]) -> Echelon:
    """Reduced row echelon form with respect to ``unknowns`` (in the given order)."""
    order = {u: i for i, u in enumerate(unknowns)}
    ech = Echelon(list(unknowns))
    pivots = ech.pivots
    for row in rows:
        row = {k: v for k, v in row.items() if not v.is_zero()}
        pivoted = False
        while True:
            cand = [k for k in row if k in order]
            if not cand:
                break
            u = min(cand, key=order.__getitem__)
            prow = pivots.get(u)
            if prow is None:
                inv = row[u].inverse()
                pivots[u] = {k: v * inv for k, v in row.items()}
                pivoted = True
                break
            _axpy(row, row[u], prow)
        if not pivoted and row:
            ech.constraints.append(row)
    # back substitution, latest pivots first
    for u in sorted(pivots, key=order.__getitem__, reverse=True):
        prow = pivots[u]
        for v, other in pivots.items():
            if v != u and u in other:
                _axpy(other, other[u], prow)
    return ech
