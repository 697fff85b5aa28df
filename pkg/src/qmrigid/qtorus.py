"""Quantum tori with integer exponent matrices over Q(q).

``Y_i Y_j = q^{A_ij} Y_j Y_i`` with ``A`` antisymmetric.  Monomials are kept
in the canonical order ``Y^m = Y_1^{m_1} ... Y_N^{m_N}`` so that

    Y^m Y^m' = q^{sum_{i>j} A_ij m_i m'_j} Y^{m+m'}.

Since q has infinite order, ``Y^m`` is central exactly when ``A m = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .lattice import Lattice, integer_kernel, is_saturated
from .qfield import ONE, ZERO, Scalar, as_scalar, qpow

Exponent = Tuple[int, ...]

__all__ = [
    "ExponentMatrix",
    "QuantumTorus",
    "TorusElement",
    "MatrixMismatch",
    "torus_multiply",
    "kernel_lattice",
    "saturation_of_torus",
    "center_basis",
    "graded_component",
]


class MatrixMismatch(ValueError):
    pass


class ExponentMatrix:
    """Antisymmetric integer matrix with zero diagonal."""

    __slots__ = ("A", "N")

    def __init__(self, A: Sequence[Sequence[int]]):
        A = tuple(tuple(int(x) for x in row) for row in A)
        N = len(A)
        for i in range(N):
            if len(A[i]) != N:
                raise ValueError("exponent matrix must be square")
            if A[i][i] != 0:
                raise ValueError("exponent matrix must have zero diagonal")
            for j in range(i):
                if A[i][j] != -A[j][i]:
                    raise ValueError("exponent matrix must be antisymmetric")
        self.A = A
        self.N = N

    def __getitem__(self, ij):
        i, j = ij
        return self.A[i][j]

    def __eq__(self, other):
        return isinstance(other, ExponentMatrix) and self.A == other.A

    def __hash__(self):
        return hash(self.A)

    def form(self, m: Sequence[int], m2: Sequence[int]) -> int:
        """``m^T A m2``: exponent with ``Y^m Y^m2 = q^form Y^m2 Y^m``."""
        A = self.A
        return sum(m[i] * A[i][j] * m2[j] for i in range(self.N) if m[i] for j in range(self.N) if m2[j])

    def twist(self, m: Sequence[int], m2: Sequence[int]) -> int:
        A = self.A
        N = self.N
        return sum(
            A[i][j] * m[i] * m2[j] for i in range(N) if m[i] for j in range(i) if m2[j]
        )

    def apply(self, m: Sequence[int]) -> Tuple[int, ...]:
        return tuple(sum(a * x for a, x in zip(row, m)) for row in self.A)


class QuantumTorus:
    """The twisted Laurent algebra attached to an exponent matrix and a degree vector."""

    def __init__(self, A, degree: Optional[Sequence[int]] = None, name: str = ""):
        self.matrix = A if isinstance(A, ExponentMatrix) else ExponentMatrix(A)
        self.N = self.matrix.N
        self.degree = tuple(degree) if degree is not None else (1,) * self.N
        if len(self.degree) != self.N or any(d <= 0 for d in self.degree):
            raise ValueError("degree vector must have N positive entries")
        self.name = name
        self._kernel: Optional[Lattice] = None

    # -- constructors -----------------------------------------------------------

    def monomial(self, m: Sequence[int], coeff=ONE) -> "TorusElement":
        m = tuple(int(x) for x in m)
        if len(m) != self.N:
            raise ValueError("exponent vector has wrong length")
        coeff = as_scalar(coeff)
        return TorusElement(self, {m: coeff} if coeff else {})

    def gen(self, i: int, power: int = 1) -> "TorusElement":
        m = [0] * self.N
        m[i - 1] = power
        return self.monomial(m)

    def one(self) -> "TorusElement":
        return self.monomial((0,) * self.N)

    def zero(self) -> "TorusElement":
        return TorusElement(self, {})

    def element(self, terms: Mapping[Iterable[int], object]) -> "TorusElement":
        acc: Dict[Exponent, Scalar] = {}
        for m, c in terms.items():
            m = tuple(m)
            c = as_scalar(c)
            s = acc.get(m, ZERO) + c
            if s.is_zero():
                acc.pop(m, None)
            else:
                acc[m] = s
        return TorusElement(self, acc)

    # -- structure --------------------------------------------------------------

    def deg(self, m: Sequence[int]) -> int:
        return sum(d * x for d, x in zip(self.degree, m))

    def kernel(self) -> Lattice:
        if self._kernel is None:
            self._kernel = kernel_lattice(self.matrix)
        return self._kernel

    def is_central_monomial(self, m: Sequence[int]) -> bool:
        return not any(self.matrix.apply(m))

    def conj_exponent(self, a: Sequence[int], m: Sequence[int]) -> int:
        """``Y^a Y^m Y^-a = q^e Y^m``; returns e."""
        return self.matrix.form(a, m)

    def with_degree(self, degree: Sequence[int]) -> "QuantumTorus":
        return QuantumTorus(self.matrix, degree, self.name)

    def __repr__(self):
        return f"<QuantumTorus {self.name or ''} N={self.N}>"


@dataclass(frozen=True, eq=False)
class TorusElement:
    torus: QuantumTorus
    terms: Dict[Exponent, Scalar] = field(default_factory=dict)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other: "TorusElement") -> None:
        if other.torus is not self.torus and other.torus.matrix != self.torus.matrix:
            raise MatrixMismatch("elements of different quantum tori")

    def _coerce(self, other):
        if isinstance(other, TorusElement):
            self._check(other)
            return other
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return self.torus.monomial((0,) * self.torus.N, s)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc = dict(self.terms)
        for m, c in other.terms.items():
            s = acc.get(m, ZERO) + c
            if s.is_zero():
                acc.pop(m, None)
            else:
                acc[m] = s
        return TorusElement(self.torus, acc)

    __radd__ = __add__

    def __neg__(self):
        return TorusElement(self.torus, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def scale(self, s) -> "TorusElement":
        s = as_scalar(s)
        if s.is_zero():
            return self.torus.zero()
        return TorusElement(self.torus, {m: s * c for m, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, TorusElement):
            return torus_multiply(self, other)
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return self.scale(s)

    def __rmul__(self, other):
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return self.scale(s)

    def __pow__(self, k: int):
        if k < 0:
            if len(self.terms) != 1:
                raise ValueError("only monomials have Laurent inverses")
            ((m, c),) = self.terms.items()
            inv_m = tuple(-x for x in m)
            # Y^m Y^-m = q^t Y^0
            t = self.torus.matrix.twist(m, inv_m)
            base = self.torus.monomial(inv_m, (c * qpow(t)).inverse())
            return base ** (-k)
        out = self.torus.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, TorusElement):
            return self.torus.matrix == other.torus.matrix and self.terms == other.terms
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return self == self._coerce(s)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def conjugate(self, a: Sequence[int]) -> "TorusElement":
        """``Y^a x Y^-a``."""
        T = self.torus
        out = {}
        for m, c in self.terms.items():
            e = T.conj_exponent(a, m)
            out[m] = c * qpow(e) if e else c
        return TorusElement(T, out)

    def degrees(self) -> List[int]:
        return sorted({self.torus.deg(m) for m in self.terms})

    def component(self, r: int) -> "TorusElement":
        return graded_component(self, self.torus.degree, r)

    def is_central(self) -> bool:
        return all(self.torus.is_central_monomial(m) for m in self.terms)

    def to_json(self) -> dict:
        return {
            "terms": [
                {"exp": list(m), "coeff": c.to_json()} for m, c in sorted(self.terms.items())
            ]
        }

    @classmethod
    def from_json(cls, torus: QuantumTorus, data: dict) -> "TorusElement":
        return torus.element({tuple(t["exp"]): Scalar.from_json(t["coeff"]) for t in data["terms"]})

    def __str__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"({c})*Y^{list(m)}" for m, c in sorted(self.terms.items()))

    def __repr__(self):
        return f"TorusElement({self})"


def torus_multiply(a: TorusElement, b: TorusElement) -> TorusElement:
    a._check(b)
    T = a.torus
    mat = T.matrix
    acc: Dict[Exponent, Scalar] = {}
    for m, c in a.terms.items():
        for m2, c2 in b.terms.items():
            t = mat.twist(m, m2)
            c3 = c * c2
            if t:
                c3 = c3 * qpow(t)
            key = tuple(x + y for x, y in zip(m, m2))
            s = acc.get(key)
            if s is None:
                acc[key] = c3
            else:
                s = s + c3
                if s.is_zero():
                    del acc[key]
                else:
                    acc[key] = s
    return TorusElement(T, acc)


def _as_matrix(A) -> ExponentMatrix:
    if isinstance(A, QuantumTorus):
        return A.matrix
    if isinstance(A, ExponentMatrix):
        return A
    return ExponentMatrix(A)


def kernel_lattice(A) -> Lattice:
    """Integer kernel of the exponent matrix (the multiplicative kernel for generic q)."""
    mat = _as_matrix(A)
    if mat.N == 0:
        return Lattice(0)
    return Lattice(mat.N, integer_kernel(mat.A))


def saturation_of_torus(A) -> bool:
    return is_saturated(kernel_lattice(A))


def center_basis(A) -> List[Tuple[int, ...]]:
    """Exponent vectors spanning the center: ``Y^m`` is central iff ``m`` is in their span."""
    return list(kernel_lattice(A).basis)


def graded_component(e: TorusElement, d: Sequence[int], r: int) -> TorusElement:
    if any(x <= 0 for x in d):
        raise ValueError("degree vector must be positive")
    return TorusElement(
        e.torus,
        {m: c for m, c in e.terms.items() if sum(a * b for a, b in zip(d, m)) == r},
    )
