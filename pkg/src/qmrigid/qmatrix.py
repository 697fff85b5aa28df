"""The algebra of n x n quantum matrices as a PBW algebra.

Generators are ordered column-major: ``X_{k+(l-1)n} = x_kl``.  Besides the
presentation this module carries the index combinatorics attached to that
ordering (diagonal labels ``mu``, successor ``succ``, first preimages ``f``,
minor sizes ``d``), quantum minors, the border minors ``Delta_i``, the torus
action, the transpose and their semidirect-product combination ``eta``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .pbw import PBWElement, Presentation, apply_endomorphism, compose_endomorphisms, q_commutation_exponent
from .qfield import ONE, Scalar, as_scalar, q, qpow

__all__ = [
    "MatrixIndexing",
    "QuantumMatrices",
    "BadIndexSet",
    "CommutationFailure",
    "build_presentation",
    "quantum_minor",
    "special_minor",
    "torus_action",
    "transpose_tau",
    "eta",
    "swap_blocks",
    "eta_product",
    "minor_commutation_exponents",
    "chain_sum_exponents",
]

MAX_COMMUTATION_N = 4


class BadIndexSet(ValueError):
    pass


class CommutationFailure(ArithmeticError):
    pass


@dataclass(frozen=True)
class MatrixIndexing:
    """Index bookkeeping for n x n quantum matrices (all labels 1-based)."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def N(self) -> int:
        return self.n * self.n

    def to_flat(self, k: int, l: int) -> int:
        return k + (l - 1) * self.n

    def to_pos(self, i: int) -> Tuple[int, int]:
        l, k = divmod(i - 1, self.n)
        return k + 1, l + 1

    def mu(self, i: int) -> int:
        k, l = self.to_pos(i)
        return self.n + l - k

    def succ(self, i: int) -> Optional[int]:
        """Next index with the same ``mu`` label, or None (standing for infinity)."""
        m = self.mu(i)
        for j in range(i + 1, self.N + 1):
            if self.mu(j) == m:
                return j
        return None

    def chain(self, i: int) -> List[int]:
        """``[i, s(i), s^2(i), ...]`` up to the last finite term."""
        out = [i]
        while (j := self.succ(out[-1])) is not None:
            out.append(j)
        return out

    def chain_len(self, i: int) -> int:
        """Largest r with ``s^r(i)`` finite."""
        return len(self.chain(i)) - 1

    def f(self, i: int) -> int:
        """Smallest flat index with ``mu`` label ``i`` (i in 1..2n-1)."""
        return min(j for j in range(1, self.N + 1) if self.mu(j) == i)

    def d(self, i: int) -> int:
        k, l = self.to_pos(i)
        return self.n + 1 - max(k, l)

    def degree_vector(self) -> Tuple[int, ...]:
        return tuple(self.d(i) for i in range(1, self.N + 1))

    def special_sets(self, i: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        """Row and column sets of the border minor ``Delta_i``."""
        n = self.n
        k, l = self.to_pos(i)
        if k >= l:
            return tuple(range(k, n + 1)), tuple(range(l, n + l - k + 1))
        return tuple(range(k, n - l + k + 1)), tuple(range(l, n + 1))

    def to_json(self) -> dict:
        N = self.N
        return {
            "n": self.n,
            "N": N,
            "pos": [list(self.to_pos(i)) for i in range(1, N + 1)],
            "mu": [self.mu(i) for i in range(1, N + 1)],
            "succ": [self.succ(i) for i in range(1, N + 1)],
            "chain_len": [self.chain_len(i) for i in range(1, N + 1)],
            "f": [self.f(i) for i in range(1, 2 * self.n)],
            "d": list(self.degree_vector()),
        }


def _relation(ix: MatrixIndexing, b: int, a: int):
    """Exponent and correction for ``X_b X_a`` with ``b > a``."""
    kb, lb = ix.to_pos(b)
    ka, la = ix.to_pos(a)
    if lb == la or kb == ka:
        # same column (rows ka < kb) or same row (cols la < lb)
        return -1, {}
    if kb < ka:
        return 0, {}
    # ka < kb and la < lb:  x_a x_b - x_b x_a = (q - q^-1) x_{ka,lb} x_{kb,la}
    u, v = ix.to_flat(kb, la), ix.to_flat(ka, lb)
    return 0, {(u, v): -(q - qpow(-1))}


@lru_cache(maxsize=None)
def build_presentation(n: int) -> Presentation:
    """The PBW presentation of ``R_q[M_n]`` in column-major generator order."""
    ix = MatrixIndexing(n)
    N = ix.N
    exp = [[0] * N for _ in range(N)]
    corr = {}
    for b in range(1, N + 1):
        for a in range(1, b):
            e, c = _relation(ix, b, a)
            exp[b - 1][a - 1] = e
            if c:
                corr[(b, a)] = c
    return Presentation(N, exp, corr, name=f"R_q[M_{n}]")


def inversions(perm: Sequence[int]) -> int:
    return sum(1 for i in range(len(perm)) for j in range(i + 1, len(perm)) if perm[i] > perm[j])


class QuantumMatrices:
    """``R_q[M_n]`` together with its minors and distinguished endomorphisms."""

    _instances: Dict[int, "QuantumMatrices"] = {}

    def __new__(cls, n: int):
        inst = cls._instances.get(n)
        if inst is None:
            inst = super().__new__(cls)
            inst.n = n
            inst.ix = MatrixIndexing(n)
            inst.pres = build_presentation(n)
            inst._minors = {}
            cls._instances[n] = inst
        return inst

    @property
    def N(self) -> int:
        return self.ix.N

    def x(self, k: int, l: int) -> PBWElement:
        return self.pres.gen(self.ix.to_flat(k, l))

    def minor(self, rows: Sequence[int], cols: Sequence[int]) -> PBWElement:
        rows, cols = tuple(rows), tuple(cols)
        key = (rows, cols)
        if key in self._minors:
            return self._minors[key]
        n = self.n
        if (
            not rows
            or len(rows) != len(cols)
            or list(rows) != sorted(set(rows))
            or list(cols) != sorted(set(cols))
            or not all(1 <= i <= n for i in rows + cols)
        ):
            raise BadIndexSet(f"bad minor index sets {rows} | {cols}")
        r = len(rows)
        terms = {}
        for perm in itertools.permutations(range(r)):
            word = tuple(self.ix.to_flat(rows[t], cols[perm[t]]) for t in range(r))
            terms[word] = (-q) ** inversions(perm)
        out = self.pres.element(terms)
        self._minors[key] = out
        return out

    def special_minor(self, i: int) -> PBWElement:
        if not 1 <= i <= self.N:
            raise IndexError(f"index {i} out of range 1..{self.N}")
        return self.minor(*self.ix.special_sets(i))

    @cached_property
    def deltas(self) -> List[PBWElement]:
        return [self.special_minor(i) for i in range(1, self.N + 1)]

    # -- endomorphisms ---------------------------------------------------------

    def identity_images(self) -> List[PBWElement]:
        return self.pres.gens()

    def torus_action(self, c: Sequence) -> List[PBWElement]:
        """Images of ``x_kl -> c_k c_{n+l}^-1 x_kl`` for ``c`` in (Q(q)*)^{2n}."""
        n = self.n
        c = [as_scalar(v) for v in c]
        if len(c) != 2 * n or any(v.is_zero() for v in c):
            raise ValueError(f"torus element needs {2 * n} nonzero entries")
        images = []
        for i in range(1, self.N + 1):
            k, l = self.ix.to_pos(i)
            images.append(self.pres.gen(i).scale(c[k - 1] / c[n + l - 1]))
        return images

    def transpose_tau(self) -> List[PBWElement]:
        images = []
        for i in range(1, self.N + 1):
            k, l = self.ix.to_pos(i)
            images.append(self.x(l, k))
        return images

    def eta(self, c: Sequence, k: int) -> List[PBWElement]:
        """Images of ``u -> c . tau^k(u)``."""
        if k % 2 == 0:
            return self.torus_action(c)
        return compose_endomorphisms(self.torus_action(c), self.transpose_tau())

    def apply(self, images: Sequence[PBWElement], e: PBWElement) -> PBWElement:
        return apply_endomorphism(images, e)


def swap_blocks(c: Sequence) -> Tuple[Scalar, ...]:
    """The torus element ``tau h tau`` corresponds to when ``h`` is given by ``c``.

    Conjugating by the transpose exchanges the row and column blocks and
    inverts them: ``tau h_c tau = h_c'`` with ``c' = (c_{n+1..2n}^-1, c_{1..n}^-1)``.
    """
    c = [as_scalar(v) for v in c]
    n = len(c) // 2
    return tuple(v.inverse() for v in c[n:] + c[:n])


def eta_product(h1: Sequence, k1: int, h2: Sequence, k2: int):
    """Group law of the semidirect product: ``(h1,k1)(h2,k2)``."""
    h2t = swap_blocks(h2) if k1 % 2 else tuple(as_scalar(v) for v in h2)
    return tuple(as_scalar(a) * b for a, b in zip(h1, h2t)), (k1 + k2) % 2


# -- functional surface --------------------------------------------------------


def quantum_minor(n: int, rows: Sequence[int], cols: Sequence[int]) -> PBWElement:
    return QuantumMatrices(n).minor(rows, cols)


def special_minor(n: int, i: int) -> PBWElement:
    return QuantumMatrices(n).special_minor(i)


def torus_action(n: int, c: Sequence) -> List[PBWElement]:
    return QuantumMatrices(n).torus_action(c)


def transpose_tau(n: int) -> List[PBWElement]:
    return QuantumMatrices(n).transpose_tau()


def eta(n: int, c: Sequence, k: int) -> List[PBWElement]:
    return QuantumMatrices(n).eta(c, k)


def chain_sum_exponents(n: int, A: Optional[Sequence[Sequence[int]]] = None) -> List[List[int]]:
    """``b_ij = sum_k sum_l A[s^k(i)][s^l(j)]`` over the successor chains."""
    qm = QuantumMatrices(n)
    if A is None:
        A = qm.pres.exp
    N = qm.N
    chains = [qm.ix.chain(i) for i in range(1, N + 1)]
    return [
        [sum(A[a - 1][b - 1] for a in chains[i] for b in chains[j]) for j in range(N)]
        for i in range(N)
    ]


@lru_cache(maxsize=None)
def _commutation_matrix(n: int) -> Tuple[Tuple[int, ...], ...]:
    qm = QuantumMatrices(n)
    N = qm.N
    D = qm.deltas
    B = [[0] * N for _ in range(N)]
    for i in range(N):
        for j in range(i + 1, N):
            m = q_commutation_exponent(D[i], D[j])
            if m is None:
                raise CommutationFailure(
                    f"Delta_{i + 1} and Delta_{j + 1} do not q-commute"
                )
            B[i][j] = m
            B[j][i] = -m
    return tuple(tuple(r) for r in B)


def minor_commutation_exponents(n: int, max_n: int = MAX_COMMUTATION_N) -> List[List[int]]:
    """Matrix ``b`` with ``Delta_i Delta_j = q^b_ij Delta_j Delta_i``, verified in PBW form.

    Also checks ``b`` against the chain-sum formula and raises
    :class:`CommutationFailure` on any disagreement.
    """
    if n > max_n:
        raise ValueError(f"n={n} exceeds the configured bound {max_n}")
    B = [list(r) for r in _commutation_matrix(n)]
    if B != chain_sum_exponents(n):
        raise CommutationFailure("PBW commutation exponents disagree with the chain-sum formula")
    return B
