"""Integer lattices: Hermite normal form, integer kernels, saturation."""

from __future__ import annotations

from typing import List, Sequence, Tuple

from flint import fmpz_mat

Vector = Tuple[int, ...]


def _xgcd(a: int, b: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        t = a // b
        a, b = b, a - t * b
        x0, x1 = x1, x0 - t * x1
        y0, y1 = y1, y0 - t * y1
    return a, x0, y0


def hnf_with_transform(rows: Sequence[Sequence[int]]):
    """Row-style Hermite normal form ``H = U M`` with ``U`` unimodular.

    Returns ``(H, U)`` where ``H`` keeps all rows (zero rows last), pivots are
    positive and entries above each pivot lie in ``[0, pivot)``.
    """
    M = [list(map(int, r)) for r in rows]
    m = len(M)
    ncols = len(M[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    for col in range(ncols):
        if r == m:
            break
        for i in range(r + 1, m):
            a, b = M[r][col], M[i][col]
            if b == 0:
                continue
            g, x, y = _xgcd(a, b)
            ag, bg = a // g, b // g
            # [[x, y], [-b/g, a/g]] has determinant 1
            M[r], M[i] = (
                [x * s + y * t for s, t in zip(M[r], M[i])],
                [-bg * s + ag * t for s, t in zip(M[r], M[i])],
            )
            U[r], U[i] = (
                [x * s + y * t for s, t in zip(U[r], U[i])],
                [-bg * s + ag * t for s, t in zip(U[r], U[i])],
            )
        piv = M[r][col]
        if piv == 0:
            continue
        if piv < 0:
            M[r] = [-v for v in M[r]]
            U[r] = [-v for v in U[r]]
            piv = -piv
        for i in range(r):
            t = M[i][col] // piv
            if t:
                M[i] = [s - t * p for s, p in zip(M[i], M[r])]
                U[i] = [s - t * p for s, p in zip(U[i], U[r])]
        r += 1
    return M, U


def hnf(rows: Sequence[Sequence[int]]) -> List[Vector]:
    """Nonzero rows of the Hermite normal form (a canonical lattice basis)."""
    if not rows:
        return []
    H, _ = hnf_with_transform(rows)
    return [tuple(r) for r in H if any(r)]


def integer_kernel(A: Sequence[Sequence[int]]) -> List[Vector]:
    """HNF basis of ``{m in Z^N : A m = 0}`` for an ``r x N`` integer matrix."""
    if not A:
        return []
    N = len(A[0])
    At = [[A[i][j] for i in range(len(A))] for j in range(N)]
    H, U = hnf_with_transform(At)
    basis = [U[i] for i in range(N) if not any(H[i])]
    return hnf(basis) if basis else []


def smith_invariants(rows: Sequence[Sequence[int]]) -> List[int]:
    """Nonzero Smith invariant factors of the matrix with the given rows."""
    if not rows:
        return []
    S = fmpz_mat([list(map(int, r)) for r in rows]).snf()
    k = min(S.nrows(), S.ncols())
    return [abs(int(S[i, i])) for i in range(k) if S[i, i] != 0]


class Lattice:
    """A sublattice of ``Z^N`` stored by its canonical HNF basis."""

    __slots__ = ("N", "basis")

    def __init__(self, N: int, generators: Sequence[Sequence[int]] = ()):
        self.N = N
        for g in generators:
            if len(g) != N:
                raise ValueError("generator has wrong length")
        self.basis: Tuple[Vector, ...] = tuple(hnf(list(generators))) if generators else ()

    @property
    def rank(self) -> int:
        return len(self.basis)

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.N == other.N and self.basis == other.basis

    def __hash__(self):
        return hash((self.N, self.basis))

    def __contains__(self, v: Sequence[int]) -> bool:
        v = list(v)
        # HNF is echelon: reduce along pivots
        for row in self.basis:
            p = next(i for i, x in enumerate(row) if x)
            if v[p] % row[p]:
                return False
            t = v[p] // row[p]
            if t:
                v = [a - t * b for a, b in zip(v, row)]
        return not any(v)

    def is_saturated(self) -> bool:
        return is_saturated(self)

    def to_json(self) -> dict:
        return {"N": self.N, "basis": [list(b) for b in self.basis]}

    def __repr__(self):
        return f"Lattice(N={self.N}, basis={list(self.basis)})"


def is_saturated(L: Lattice) -> bool:
    """True iff ``Z^N / L`` is torsion-free."""
    if L.rank == 0:
        return True
    return all(f == 1 for f in smith_invariants(L.basis))
