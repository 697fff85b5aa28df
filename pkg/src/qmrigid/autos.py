"""Unipotent automorphisms: truncated torus series and the endomorphism solver.

Two halves.  The first is arithmetic in the completed quantum torus, cut off
above a fixed degree: series, geometric inverses, automorphisms
``Y_i -> (1 + u_i) Y_i`` with composition and inversion, and the top-degree
argument showing a finite ``1 + u`` with ``u`` central has no finite inverse
unless ``u = 0``.

The second half works on ``R_q[M_n]`` itself.  ``solve_unipotent`` writes
``Phi(X_g) = X_g + P_g^(2) + ... + P_g^(D)`` with unknown coefficients on all
normal words and imposes the defining relations (and optionally
``Phi(Delta_f(i)) = Delta_f(i)``) one degree at a time.  At degree ``r`` the
equations are affine in the degree-``r`` unknowns once the lower parts are
known; lower free coefficients are carried as symbolic parameters, so the
right-hand sides are polynomials in them.

Torus computations use the Delta coordinates: generator ``Y_i`` stands for
the border minor ``Delta_i``, the exponent matrix is the minor commutation
matrix and ``deg Y_i`` is the size of ``Delta_i``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from . import linalg
from .pbw import PBWElement, Presentation, Word, _add_into, apply_endomorphism
from .qfield import ONE, ZERO, Scalar, as_scalar, qpow
from .qmatrix import MatrixIndexing, QuantumMatrices, minor_commutation_exponents
from .qtorus import QuantumTorus, TorusElement

__all__ = [
    "CutoffMismatch",
    "NotPositivelyGraded",
    "ConsistencyViolation",
    "NotCentral",
    "DegreeBudgetExceeded",
    "TruncatedSeries",
    "UnipotentAut",
    "EndoCandidate",
    "SolveReport",
    "delta_torus",
    "delta_evaluate",
    "series_arith",
    "invert_one_plus",
    "apply_unipotent",
    "compose",
    "inverse",
    "central_unit_check",
    "polynomial_inverse_obstruction",
    "random_central_aut",
    "lift_unipotent",
    "grading_coincides",
    "solve_unipotent",
    "satisfies_truncated",
    "central_family",
    "center_generators",
    "center_comparison",
]

MAX_SOLVER_DEGREE = {1: 8, 2: 6, 3: 3}
DEFAULT_DEGREE = {1: 4, 2: 4, 3: 3}

RELATIONS = "relations"
FIX_MINORS = "fix_special_minors"


class CutoffMismatch(ValueError):
    pass


class NotPositivelyGraded(ValueError):
    pass


class ConsistencyViolation(ArithmeticError):
    pass


class NotCentral(ValueError):
    pass


class DegreeBudgetExceeded(ValueError):
    pass


# -- the Delta-coordinate torus ---------------------------------------------------


@lru_cache(maxsize=None)
def delta_torus(n: int) -> QuantumTorus:
    """Torus on ``Y_i = Delta_i`` with the minor commutation matrix and sizes as degrees."""
    ix = MatrixIndexing(n)
    return QuantumTorus(minor_commutation_exponents(n), ix.degree_vector(), name=f"Delta torus n={n}")


def grading_coincides(n: int) -> bool:
    """Delta_i is a product of ``d_i`` final torus generators, so both gradings agree."""
    ix = MatrixIndexing(n)
    return all(len(ix.chain(i)) == ix.d(i) for i in range(1, ix.N + 1))


def delta_evaluate(n: int, e: TorusElement) -> PBWElement:
    """Send ``Y^m`` (all ``m_i >= 0``) to ``Delta_1^m_1 ... Delta_N^m_N`` in ``R_q[M_n]``."""
    qm = QuantumMatrices(n)
    out = qm.pres.zero()
    for m, c in e.terms.items():
        if any(x < 0 for x in m):
            raise ValueError("only nonnegative Delta monomials live in R_q[M_n]")
        p = qm.pres.one()
        for i, x in enumerate(m):
            if x:
                p = p * qm.deltas[i] ** x
        out = out + p.scale(c)
    return out


# -- truncated series -------------------------------------------------------------


def _truncate(e: TorusElement, D: int) -> TorusElement:
    T = e.torus
    return TorusElement(T, {m: c for m, c in e.terms.items() if T.deg(m) <= D})


class TruncatedSeries:
    """An element of the completed torus known modulo degrees above ``D``."""

    __slots__ = ("torus", "D", "element")

    def __init__(self, torus: QuantumTorus, D: int, element: Optional[TorusElement] = None):
        self.torus = torus
        self.D = D
        if element is None:
            element = torus.zero()
        elif element.torus.matrix != torus.matrix:
            raise CutoffMismatch("series over a different torus")
        self.element = _truncate(element, D)

    @classmethod
    def one(cls, torus: QuantumTorus, D: int) -> "TruncatedSeries":
        return cls(torus, D, torus.one())

    @classmethod
    def zero(cls, torus: QuantumTorus, D: int) -> "TruncatedSeries":
        return cls(torus, D)

    @property
    def components(self) -> Dict[int, TorusElement]:
        out: Dict[int, Dict] = {}
        for m, c in self.element.terms.items():
            out.setdefault(self.torus.deg(m), {})[m] = c
        return {r: TorusElement(self.torus, t) for r, t in sorted(out.items())}

    def min_degree(self) -> Optional[int]:
        if not self.element.terms:
            return None
        return min(self.torus.deg(m) for m in self.element.terms)

    def is_zero(self) -> bool:
        return self.element.is_zero()

    def _same(self, other: "TruncatedSeries") -> None:
        if not isinstance(other, TruncatedSeries):
            raise TypeError("expected a TruncatedSeries")
        if other.D != self.D:
            raise CutoffMismatch(f"cutoffs differ: {self.D} vs {other.D}")
        if other.torus.matrix != self.torus.matrix or other.torus.degree != self.torus.degree:
            raise CutoffMismatch("series over different tori or gradings")

    def __add__(self, other):
        self._same(other)
        return TruncatedSeries(self.torus, self.D, self.element + other.element)

    def __sub__(self, other):
        self._same(other)
        return TruncatedSeries(self.torus, self.D, self.element - other.element)

    def __neg__(self):
        return TruncatedSeries(self.torus, self.D, -self.element)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.torus, self.D, self.element.scale(other))
        self._same(other)
        for s in (self, other):
            r = s.min_degree()
            if r is not None and r < 0:
                # a known-mod-D factor times a negative degree loses information below D
                raise NotPositivelyGraded("products need series without negative-degree terms")
        return TruncatedSeries(self.torus, self.D, _truncated_product(self.element, other.element, self.D))

    def __rmul__(self, other):
        return TruncatedSeries(self.torus, self.D, self.element.scale(other))

    def conjugate(self, a: Sequence[int]) -> "TruncatedSeries":
        return TruncatedSeries(self.torus, self.D, self.element.conjugate(a))

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.D == other.D and self.torus.matrix == other.torus.matrix and self.element == other.element

    def __hash__(self):
        return hash((self.D, self.element))

    def to_json(self) -> dict:
        return {"D": self.D, "element": self.element.to_json()}

    def __repr__(self):
        return f"TruncatedSeries(D={self.D}, {self.element})"


def _truncated_product(a: TorusElement, b: TorusElement, D: int) -> TorusElement:
    T = a.torus
    mat = T.matrix
    acc: Dict[Tuple[int, ...], Scalar] = {}
    bdeg = [(m2, c2, T.deg(m2)) for m2, c2 in b.terms.items()]
    for m, c in a.terms.items():
        dm = T.deg(m)
        for m2, c2, d2 in bdeg:
            if dm + d2 > D:
                continue
            t = mat.twist(m, m2)
            c3 = c * c2
            if t:
                c3 = c3 * qpow(t)
            key = tuple(x + y for x, y in zip(m, m2))
            s = acc.get(key, ZERO) + c3
            if s.is_zero():
                acc.pop(key, None)
            else:
                acc[key] = s
    return TorusElement(T, acc)


def series_arith(a: TruncatedSeries, b: TruncatedSeries, op: str) -> TruncatedSeries:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def _positive(u: TruncatedSeries) -> None:
    r = u.min_degree()
    if r is not None and r < 1:
        raise NotPositivelyGraded(f"series has a component in degree {r}")


def invert_one_plus(u: TruncatedSeries) -> TruncatedSeries:
    """``v`` with ``(1+v)(1+u) = 1`` modulo the cutoff (geometric series)."""
    _positive(u)
    v = TruncatedSeries.zero(u.torus, u.D)
    power = TruncatedSeries.one(u.torus, u.D)
    sign = 1
    for _ in range(u.D):
        power = power * u
        if power.is_zero():
            break
        sign = -sign
        v = v + (power if sign > 0 else -power)
    return v


# -- unipotent automorphisms ---------------------------------------------------------

Headed = Tuple[TruncatedSeries, Tuple[int, ...]]  # (S, m) stands for S * Y^m


class UnipotentAut:
    """``phi(Y_i) = (1 + u_i) Y_i``, all ``u_i`` of positive degree, known up to ``D``."""

    def __init__(self, torus: QuantumTorus, u: Sequence[TruncatedSeries], check: bool = True):
        if len(u) != torus.N:
            raise ValueError(f"need {torus.N} series, got {len(u)}")
        D = u[0].D if u else 0
        for s in u:
            if s.D != D:
                raise CutoffMismatch("all u_i need the same cutoff")
            _positive(s)
        self.torus = torus
        self.D = D
        self.u = list(u)
        self._images: Dict[Tuple[int, ...], Headed] = {}
        self._inv: Dict[int, TruncatedSeries] = {}
        if check:
            bad = self.consistency_failures()
            if bad:
                raise ConsistencyViolation(f"images do not q-commute for pairs {bad}")

    @classmethod
    def identity(cls, torus: QuantumTorus, D: int) -> "UnipotentAut":
        return cls(torus, [TruncatedSeries.zero(torus, D) for _ in range(torus.N)])

    def _e(self, i: int) -> Tuple[int, ...]:
        v = [0] * self.torus.N
        v[i] = 1
        return tuple(v)

    def consistency_failures(self) -> List[Tuple[int, int]]:
        one = TruncatedSeries.one(self.torus, self.D)
        bad = []
        for i in range(self.torus.N):
            for j in range(i + 1, self.torus.N):
                lhs = (one + self.u[i]) * (one + self.u[j]).conjugate(self._e(i))
                rhs = (one + self.u[j]) * (one + self.u[i]).conjugate(self._e(j))
                if lhs != rhs:
                    bad.append((i + 1, j + 1))
        return bad

    def is_identity(self) -> bool:
        return all(s.is_zero() for s in self.u)

    def _gen_image(self, i: int, sign: int) -> Headed:
        one = TruncatedSeries.one(self.torus, self.D)
        e = self._e(i)
        if sign > 0:
            return one + self.u[i], e
        if i not in self._inv:
            self._inv[i] = invert_one_plus(self.u[i])
        # Y^-1 (1+u)^-1 = c_{-e}((1+u)^-1) Y^-1
        neg = tuple(-x for x in e)
        return (one + self._inv[i]).conjugate(neg), neg

    def _mul(self, a: Headed, b: Headed) -> Headed:
        (S1, m1), (S2, m2) = a, b
        t = self.torus.matrix.twist(m1, m2)
        S = S1 * S2.conjugate(m1)
        if t:
            S = S * qpow(t)
        return S, tuple(x + y for x, y in zip(m1, m2))

    def monomial_image(self, m: Sequence[int]) -> Headed:
        """``phi(Y^m)`` as ``(S, m)`` with ``S`` a relative series in ``1 + T^{>=1}``."""
        m = tuple(m)
        got = self._images.get(m)
        if got is not None:
            return got
        out: Headed = (TruncatedSeries.one(self.torus, self.D), (0,) * self.torus.N)
        for i, x in enumerate(m):
            if x:
                g = self._gen_image(i, 1 if x > 0 else -1)
                for _ in range(abs(x)):
                    out = self._mul(out, g)
        self._images[m] = out
        return out

    def to_json(self) -> dict:
        return {"D": self.D, "u": [s.element.to_json() for s in self.u]}


def apply_unipotent(phi: UnipotentAut, e: TruncatedSeries) -> TruncatedSeries:
    """``phi(e)``; the result is known up to ``min(e.D, phi.D + min(0, lowest degree of e))``."""
    if e.torus.matrix != phi.torus.matrix:
        raise CutoffMismatch("series over a different torus")
    T = phi.torus
    r = e.min_degree()
    cutoff = min(e.D, phi.D + min(0, r if r is not None else 0))
    acc = T.zero()
    for m, c in e.element.terms.items():
        S, _ = phi.monomial_image(m)
        shift = T.deg(m)
        part = {}
        for m2, c2 in S.element.terms.items():
            if T.deg(m2) + shift > cutoff:
                continue
            part[m2] = c2
        acc = acc + (TorusElement(T, part) * T.monomial(m)).scale(c)
    return TruncatedSeries(T, cutoff, acc)


def compose(phi: UnipotentAut, psi: UnipotentAut) -> UnipotentAut:
    """``phi o psi``: ``Y_i -> (1 + phi(w_i)) (1 + u_i) Y_i`` where ``psi(Y_i) = (1+w_i) Y_i``."""
    if phi.D != psi.D:
        raise CutoffMismatch("automorphisms with different cutoffs")
    one = TruncatedSeries.one(phi.torus, phi.D)
    u = []
    for i in range(phi.torus.N):
        w = apply_unipotent(phi, psi.u[i])
        u.append((one + w) * (one + phi.u[i]) - one)
    return UnipotentAut(phi.torus, u, check=False)


def inverse(phi: UnipotentAut) -> UnipotentAut:
    """Solve ``phi(w_i) = (1+u_i)^-1 - 1`` for ``w_i`` by fixed-point iteration."""
    T = phi.torus
    out = []
    for i in range(T.N):
        target = invert_one_plus(phi.u[i])
        w = target
        # phi(w) - w lives in degrees above those of w, so D rounds suffice
        for _ in range(phi.D + 1):
            nxt = w + (target - apply_unipotent(phi, w))
            if nxt == w:
                break
            w = nxt
        out.append(w)
    return UnipotentAut(T, out, check=False)


def central_unit_check(phi: UnipotentAut) -> bool:
    return all(phi.torus.is_central_monomial(m) for s in phi.u for m in s.element.terms)


def _top(e: TorusElement, d: Sequence[int]) -> Tuple[int, TorusElement]:
    degs = {m: sum(a * b for a, b in zip(d, m)) for m in e.terms}
    r = max(degs.values())
    return r, TorusElement(e.torus, {m: c for m, c in e.terms.items() if degs[m] == r})


def polynomial_inverse_obstruction(u: TorusElement, d: Optional[Sequence[int]] = None) -> bool:
    """True iff ``1 + u`` has an inverse ``1 + v`` with ``v`` a finite central element.

    For ``u != 0`` the candidate inverse is forced to agree with the geometric
    series in every degree; truncating that series at ``2 deg(u)`` and
    multiplying back leaves a nonzero top-degree product, and the same top
    term survives for any finite ``v`` since the center is a domain.
    """
    d = tuple(d) if d is not None else u.torus.degree
    if u.is_zero():
        return True
    if not u.is_central():
        raise NotCentral("u is not central")
    degs = [sum(a * b for a, b in zip(d, m)) for m in u.terms]
    if min(degs) < 1:
        raise NotPositivelyGraded("u must have all components in degrees >= 1")
    T = u.torus.with_degree(d)
    uu = TorusElement(T, dict(u.terms))
    bound = 2 * max(degs)
    v = invert_one_plus(TruncatedSeries(T, bound, uu)).element
    residue = (T.one() + v) * (T.one() + uu) - T.one()
    rv, tv = _top(v, d)
    ru, tu = _top(uu, d)
    top_product = tu * tv
    # the certificate: top(u) top(v) is nonzero, and it is the top of the residue
    if top_product.is_zero() or residue.is_zero():
        raise ArithmeticError("top-degree certificate failed; the center should be a domain")
    rr, tr = _top(residue, d)
    if rr != ru + rv or tr != top_product:
        raise ArithmeticError("top term of the residue is not top(u) top(v)")
    return False


def random_central_aut(torus: QuantumTorus, D: int, rng: random.Random, terms: int = 2, span: int = 1) -> UnipotentAut:
    """A random automorphism whose ``u_i`` are combinations of central monomials."""
    basis = list(torus.kernel().basis)
    if not basis:
        return UnipotentAut.identity(torus, D)
    u = []
    for _ in range(torus.N):
        acc = torus.zero()
        tries = 0
        while len(acc.terms) < terms and tries < 50:
            tries += 1
            coeffs = [rng.randint(-span, span) for _ in basis]
            m = tuple(sum(c * b[k] for c, b in zip(coeffs, basis)) for k in range(torus.N))
            r = torus.deg(m)
            if 1 <= r <= D:
                acc = acc + torus.monomial(m, Scalar([rng.randint(-3, 3) or 1]) * qpow(rng.randint(-2, 2)))
        u.append(TruncatedSeries(torus, D, acc))
    return UnipotentAut(torus, u)


# -- the Delta lift (n small) ---------------------------------------------------------


@dataclass
class LiftReport:
    """Outcome of matching ``Phi(Delta_i) = (1 + u_i) Delta_i`` on the Delta generators."""

    D: int
    exists: bool
    unique: bool
    u: List[Optional[TorusElement]]

    def automorphism(self, n: int) -> UnipotentAut:
        T = delta_torus(n)
        return UnipotentAut(T, [TruncatedSeries(T, self.D, x) for x in self.u])


def _nonneg_monomials(T: QuantumTorus, lo: int, hi: int) -> List[Tuple[int, ...]]:
    out = []
    bounds = [hi // d for d in T.degree]
    for m in itertools.product(*(range(b + 1) for b in bounds)):
        if lo <= T.deg(m) <= hi:
            out.append(m)
    return out


def lift_unipotent(n: int, images: Sequence[PBWElement], D: int) -> LiftReport:
    """Find ``u_i`` (polynomial in the Delta's, degrees ``1..D``) with ``Phi(Delta_i) = (1+u_i) Delta_i``.

    Equality is compared in PBW form up to total degree ``d_i + D``.  ``unique``
    records that the Delta monomials involved are linearly independent, so at
    most one such ``u_i`` can exist.
    """
    qm = QuantumMatrices(n)
    T = delta_torus(n)
    mons = _nonneg_monomials(T, 1, D)
    us: List[Optional[TorusElement]] = []
    exists = True
    unique = True
    for i in range(T.N):
        di = T.degree[i]
        yi = T.gen(i + 1)
        target = apply_endomorphism(images, qm.deltas[i]) - qm.deltas[i]
        target = qm.pres.element(
            {w: c for w, c in target.terms.items() if len(w) <= di + D}
        )
        rows: Dict[Word, Dict] = {}
        for m in mons:
            ev = delta_evaluate(n, T.monomial(m) * yi)
            for w, c in ev.terms.items():
                rows.setdefault(w, {})[("m", m)] = c
        for w, c in target.terms.items():
            rows.setdefault(w, {})[("rhs",)] = -c
        unknowns = [("m", m) for m in mons]
        ech = linalg.eliminate(rows.values(), unknowns)
        if ech.free:
            unique = False
        if any(r for r in ech.constraints):
            exists = False
            us.append(None)
            continue
        terms = {}
        for u in unknowns:
            if u in ech.pivots:
                c = ech.solution(u).get(("rhs",))
                if c is not None and not c.is_zero():
                    terms[u[1]] = c
        us.append(T.element(terms))
    return LiftReport(D, exists, unique, us)


# -- the order-by-order endomorphism solver ---------------------------------------------

PMono = Tuple[int, ...]  # sorted parameter ids
PTerms = Dict[Tuple[PMono, Word], Scalar]  # parametric PBW element


def _padd(acc: PTerms, key, c: Scalar) -> None:
    s = acc.get(key)
    if s is None:
        acc[key] = c
    else:
        s = s + c
        if s.is_zero():
            del acc[key]
        else:
            acc[key] = s


def _pmul(pres: Presentation, a: PTerms, b: PTerms, c: Scalar = ONE) -> PTerms:
    acc: PTerms = {}
    for (pa, wa), ca in a.items():
        for (pb, wb), cb in b.items():
            pm = tuple(sorted(pa + pb))
            k = c * ca * cb
            for w, cw in pres.multiply_words(wa, wb).items():
                _padd(acc, (pm, w), k * cw)
    return acc


def _normal_words(N: int, r: int) -> List[Word]:
    return list(itertools.combinations_with_replacement(range(1, N + 1), r))


@dataclass
class Parameter:
    ident: int
    degree: int
    generator: int
    word: Word

    def to_json(self) -> dict:
        return {"id": self.ident, "degree": self.degree, "generator": self.generator, "word": list(self.word)}


@dataclass
class EndoCandidate:
    """``Phi(X_g) = X_g + sum_r P_g^(r)`` with coefficients polynomial in free parameters."""

    pres: Presentation
    D: int
    parts: List[Dict[int, PTerms]]  # parts[g-1][r]
    parameters: List[Parameter] = field(default_factory=list)

    def specialize(self, values: Mapping[int, object]) -> List[PBWElement]:
        vals = {k: as_scalar(v) for k, v in values.items()}
        out = []
        for g in range(1, self.pres.N + 1):
            acc = {(g,): ONE}
            for r, part in self.parts[g - 1].items():
                for (pm, w), c in part.items():
                    k = c
                    for p in pm:
                        k = k * vals.get(p, ZERO)
                    if not k.is_zero():
                        _add_into(acc, w, k)
            out.append(PBWElement(self.pres, acc))
        return out

    def is_identity(self) -> bool:
        return all(not part for parts in self.parts for part in parts.values())


@dataclass
class DegreeReport:
    degree: int
    unknowns: int
    rank: int
    new_parameters: int
    constraints: int
    solution_dim: int = 0
    basis: Optional[List[List[PBWElement]]] = None

    def to_json(self) -> dict:
        out = {
            "degree": self.degree,
            "unknowns": self.unknowns,
            "rank": self.rank,
            "solution_dim": self.solution_dim,
            "new_parameters": self.new_parameters,
            "constraints": self.constraints,
        }
        if self.basis is not None:
            out["basis"] = [[e.to_json() for e in vec] for vec in self.basis]
        return out


@dataclass
class SolveReport:
    n: int
    D: int
    constraints: Tuple[str, ...]
    per_degree: List[DegreeReport]
    candidate: EndoCandidate
    nonlinear: List[Dict[PMono, Scalar]]

    @property
    def verdict(self) -> str:
        if self.candidate.is_identity() and not any(p.solution_dim for p in self.per_degree):
            return "identity-only"
        return "nontrivial"

    def contains(self, images: Sequence[PBWElement]) -> bool:
        return satisfies_truncated(self.n, images, self.D, self.constraints)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "D": self.D,
            "constraints": list(self.constraints),
            "per_degree": [p.to_json() for p in self.per_degree],
            "unresolved_constraints": len(self.nonlinear),
            "verdict": self.verdict,
        }


def _check_constraints(constraints: Iterable[str]) -> Tuple[str, ...]:
    cs = tuple(sorted(set(constraints)))
    for c in cs:
        if c not in (RELATIONS, FIX_MINORS):
            raise ValueError(f"unknown constraint {c!r}")
    return cs


def _fixed_minors(n: int) -> List[Tuple[int, PBWElement]]:
    qm = QuantumMatrices(n)
    fs = sorted({qm.ix.f(i) for i in range(1, 2 * n)})
    return [(f, qm.special_minor(f)) for f in fs]


def _weights(n: int):
    ix = MatrixIndexing(n)
    w = {}
    for g in range(1, ix.N + 1):
        k, l = ix.to_pos(g)
        v = [0] * (2 * n)
        v[k - 1] += 1
        v[n + l - 1] += 1
        w[g] = tuple(v)
    return w


def _wsum(wt, word: Iterable[int]) -> Tuple[int, ...]:
    out = None
    for g in word:
        out = wt[g] if out is None else tuple(a + b for a, b in zip(out, wt[g]))
    return out


def _compositions(total: int, parts: int, lo: int, hi: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for a in range(lo, min(hi, total - lo * (parts - 1)) + 1):
        for rest in _compositions(total - a, parts - 1, lo, hi):
            yield (a,) + rest


def _substitute(terms: PTerms, pid: int, expr: Dict[PMono, Scalar]) -> PTerms:
    """Replace parameter ``pid`` by the polynomial ``expr`` (which does not mention it)."""
    out: PTerms = {}
    for (pm, w), c in terms.items():
        k = pm.count(pid)
        if not k:
            _padd(out, (pm, w), c)
            continue
        rest = tuple(p for p in pm if p != pid)
        polys = {rest: c}
        for _ in range(k):
            nxt: Dict[PMono, Scalar] = {}
            for a, ca in polys.items():
                for b, cb in expr.items():
                    key = tuple(sorted(a + b))
                    s = nxt.get(key, ZERO) + ca * cb
                    if s.is_zero():
                        nxt.pop(key, None)
                    else:
                        nxt[key] = s
            polys = nxt
        for a, ca in polys.items():
            _padd(out, (a, w), ca)
    return out


def solve_unipotent(
    n: int,
    D: Optional[int] = None,
    constraints: Iterable[str] = (RELATIONS,),
    with_basis: bool = False,
    max_degree: Optional[Mapping[int, int]] = None,
) -> SolveReport:
    """Describe all unipotent endomorphism candidates modulo degrees above ``D``."""
    bounds = dict(MAX_SOLVER_DEGREE)
    if max_degree:
        bounds.update(max_degree)
    if D is None:
        D = DEFAULT_DEGREE.get(n, 2)
    if n not in bounds or D > bounds[n]:
        raise DegreeBudgetExceeded(f"n={n}, D={D} is outside the configured budget {bounds}")
    if D < 2:
        raise ValueError("the degree cutoff must be at least 2")
    cons = _check_constraints(constraints)
    qm = QuantumMatrices(n)
    pres = qm.pres
    N = pres.N
    wt = _weights(n)
    minors = _fixed_minors(n) if FIX_MINORS in cons else []
    use_rel = RELATIONS in cons

    # corrections that mention a given generator
    corr_by_gen: Dict[int, List] = {g: [] for g in range(1, N + 1)}
    for (j, i), tab in pres.corr.items():
        for (s, t), c in tab.items():
            corr_by_gen[s].append((j, i, "s", s, t, c))
            if t != s:
                corr_by_gen[t].append((j, i, "t", s, t, c))

    parts: List[Dict[int, PTerms]] = [{1: {((), (g,)): ONE}} for g in range(1, N + 1)]
    params: List[Parameter] = []
    reports: List[DegreeReport] = []
    pending: List[Dict[PMono, Scalar]] = []
    eliminated: set = set()

    def lower(g: int, a: int) -> PTerms:
        return parts[g - 1].get(a, {})

    for r in range(2, D + 1):
        rows: Dict[tuple, Dict] = {}

        def add(key, sym, c):
            row = rows.setdefault(key, {})
            s = row.get(sym)
            if s is None:
                row[sym] = c
            else:
                s = s + c
                if s.is_zero():
                    del row[sym]
                else:
                    row[sym] = s

        words = _normal_words(N, r)
        unknowns = [("u", g, w) for g in range(1, N + 1) for w in words]

        if use_rel:
            # linear part: the degree-r unknown of X_g against degree-one letters
            for g in range(1, N + 1):
                for w in words:
                    sym = ("u", g, w)
                    for other in range(1, N + 1):
                        if other == g:
                            continue
                        j, i = (g, other) if g > other else (other, g)
                        qa = qpow(pres.a(j, i))
                        if g == j:
                            pieces = [(w + (i,), ONE), ((i,) + w, -qa)]
                        else:
                            pieces = [((j,) + w, ONE), (w + (j,), -qa)]
                        for word, k in pieces:
                            for ww, cw in pres.normal_terms(word).items():
                                add(("rel", j, i, ww), sym, k * cw)
                    for j, i, role, s, t, c in corr_by_gen[g]:
                        if role == "s":
                            word = w + (t,)
                        else:
                            word = (s,) + w
                        for ww, cw in pres.normal_terms(word).items():
                            add(("rel", j, i, ww), sym, -c * cw)
                        if s == t == g:
                            for ww, cw in pres.normal_terms((s,) + w).items():
                                add(("rel", j, i, ww), sym, -c * cw)
            # products of two lower parts of degree >= 2
            for j in range(1, N + 1):
                for i in range(1, j):
                    qa = qpow(pres.a(j, i))
                    for a in range(2, r):
                        b = r + 1 - a
                        if b < 2 or b >= r:
                            continue
                        acc = _pmul(pres, lower(j, a), lower(i, b))
                        for key, c in _pmul(pres, lower(i, a), lower(j, b), -qa).items():
                            _padd(acc, key, c)
                        for (s, t), c in pres.corr.get((j, i), {}).items():
                            for key, v in _pmul(pres, lower(s, a), lower(t, b), -c).items():
                                _padd(acc, key, v)
                        for (pm, ww), c in acc.items():
                            add(("rel", j, i, ww), ("p", pm), c)

        for f, delta in minors:
            d = len(next(iter(delta.terms)))
            for word, c in delta.terms.items():
                # linear part: one letter replaced by a degree-r unknown
                for pos, g in enumerate(word):
                    for w in words:
                        for ww, cw in pres.normal_terms(word[:pos] + w + word[pos + 1 :]).items():
                            add(("min", f, ww), ("u", g, w), c * cw)
                # lower parts only
                for degs in _compositions(d + r - 1, d, 1, r - 1):
                    if all(x == 1 for x in degs):
                        continue
                    acc: PTerms = {((), ()): c}
                    for g, a in zip(word, degs):
                        acc = _pmul(pres, acc, lower(g, a))
                        if not acc:
                            break
                    for (pm, ww), v in acc.items():
                        add(("min", f, ww), ("p", pm), v)

        # split by torus-weight shift; the equations never mix shifts
        def row_shift(key):
            if key[0] == "rel":
                return tuple(
                    a - b - c for a, b, c in zip(_wsum(wt, key[3]), wt[key[1]], wt[key[2]])
                )
            return tuple(a - b for a, b in zip(_wsum(wt, key[2]), _wsum(wt, next(iter(dict(minors)[key[1]].terms)))))

        blocks: Dict[tuple, List] = {}
        for key, row in rows.items():
            if row:
                blocks.setdefault(row_shift(key), []).append(row)
        ushift = {u: tuple(a - b for a, b in zip(_wsum(wt, u[2]), wt[u[1]])) for u in unknowns}
        ublocks: Dict[tuple, List] = {}
        for u in unknowns:
            ublocks.setdefault(ushift[u], []).append(u)

        pivots: Dict = {}
        free: List = []
        cons_rows: List[Dict] = []
        for sh in sorted(set(blocks) | set(ublocks)):
            ech = linalg.eliminate(blocks.get(sh, []), ublocks.get(sh, []))
            pivots.update({u: ech.solution(u) for u in ech.pivots})
            free.extend(ech.free)
            cons_rows.extend(ech.constraints)

        new_ids = {}
        for u in sorted(free, key=unknowns.index):
            pid = len(params)
            params.append(Parameter(pid, r, u[1], u[2]))
            new_ids[u] = pid

        for g in range(1, N + 1):
            part: PTerms = {}
            for w in words:
                u = ("u", g, w)
                if u in new_ids:
                    _padd(part, ((new_ids[u],), w), ONE)
                elif u in pivots:
                    for sym, c in pivots[u].items():
                        if sym[0] == "u":
                            _padd(part, ((new_ids[sym],), w), c)
                        else:
                            _padd(part, (sym[1], w), c)
            if part:
                parts[g - 1][r] = part

        basis = None
        if with_basis:
            basis = []
            for u in sorted(free, key=unknowns.index):
                vec = []
                for g in range(1, N + 1):
                    acc = {}
                    for w in words:
                        v = ("u", g, w)
                        if v == u:
                            _add_into(acc, w, ONE)
                        elif v in pivots and u in pivots[v]:
                            _add_into(acc, w, pivots[v][u])
                    vec.append(PBWElement(pres, acc))
                basis.append(vec)

        # obstructions on lower parameters; linear ones are solved and substituted
        new_cons = [{sym[1]: c for sym, c in row.items()} for row in cons_rows]
        pending.extend(c for c in new_cons if c)
        changed = True
        while changed:
            changed = False
            for poly in list(pending):
                if any(len(pm) > 1 for pm in poly) or not any(len(pm) == 1 for pm in poly):
                    continue
                if () in poly:
                    # affine with a constant term: the identity would violate it
                    raise ArithmeticError("inconsistent constraint on parameters")
                pid = max(pm[0] for pm in poly)
                lead = poly[(pid,)]
                expr = {pm: -(c / lead) for pm, c in poly.items() if pm != (pid,)}
                eliminated.add(pid)
                for g in range(N):
                    for a in list(parts[g]):
                        parts[g][a] = _substitute(parts[g][a], pid, expr)
                        if not parts[g][a]:
                            del parts[g][a]
                nxt = []
                for other in pending:
                    if other is poly:
                        continue
                    sub = _substitute({(pm, ()): c for pm, c in other.items()}, pid, expr)
                    p2 = {pm: c for (pm, _), c in sub.items()}
                    if p2:
                        nxt.append(p2)
                pending = nxt
                changed = True
                break

        reports.append(
            DegreeReport(
                degree=r,
                unknowns=len(unknowns),
                rank=len(pivots),
                new_parameters=len(free),
                constraints=len([c for c in new_cons if c]),
                basis=basis,
            )
        )

    for rep in reports:
        rep.solution_dim = sum(1 for p in params if p.degree == rep.degree and p.ident not in eliminated)
    cand = EndoCandidate(pres, D, [{a: t for a, t in p.items() if a >= 2} for p in parts], params)
    return SolveReport(n, D, cons, reports, cand, pending)


def satisfies_truncated(
    n: int, images: Sequence[PBWElement], D: int, constraints: Iterable[str] = (RELATIONS,)
) -> bool:
    """Unipotent shape up to ``D`` and every selected constraint modulo degrees above the window."""
    cons = _check_constraints(constraints)
    qm = QuantumMatrices(n)
    pres = qm.pres
    for g, im in enumerate(images, start=1):
        low = {w: c for w, c in im.terms.items() if len(w) <= 1}
        if low != {(g,): ONE} or any(len(w) > D for w in im.terms):
            return False
    if RELATIONS in cons:
        for j in range(1, pres.N + 1):
            for i in range(1, j):
                xj, xi = images[j - 1], images[i - 1]
                res = xj * xi - (xi * xj).scale(qpow(pres.a(j, i)))
                for (s, t), c in pres.corr.get((j, i), {}).items():
                    res = res - (images[s - 1] * images[t - 1]).scale(c)
                if any(len(w) <= D + 1 for w in res.terms):
                    return False
    if FIX_MINORS in cons:
        for f, delta in _fixed_minors(n):
            d = len(next(iter(delta.terms)))
            res = apply_endomorphism(list(images), delta) - delta
            if any(len(w) <= d + D - 1 for w in res.terms):
                return False
    return True


def central_family(n: int, c=ONE) -> List[PBWElement]:
    """``x_kl -> (1 + c Delta_1) x_kl``; ``Delta_1`` is the full quantum determinant."""
    qm = QuantumMatrices(n)
    z = qm.deltas[0].scale(c) + qm.pres.one()
    return [z * x for x in qm.pres.gens()]


# -- the center in Delta coordinates --------------------------------------------------


def center_generators(n: int, pairing: str = "formula") -> List[Tuple[int, ...]]:
    """Exponents of ``Delta_f(i) Delta_f(j)^-1`` (i < n) and of ``Delta_f(n)``.

    ``pairing="formula"`` takes ``j = 2n - i`` as in the quoted center
    formula; ``pairing="shifted"`` takes ``j = n + i``, which is what the
    exact kernel computation produces for n = 2, 3, 4.
    """
    if pairing not in ("formula", "shifted"):
        raise ValueError(f"unknown pairing {pairing!r}")
    ix = MatrixIndexing(n)
    N = ix.N
    out = []
    for i in range(1, n):
        j = 2 * n - i if pairing == "formula" else n + i
        v = [0] * N
        v[ix.f(i) - 1] += 1
        v[ix.f(j) - 1] -= 1
        out.append(tuple(v))
    v = [0] * N
    v[ix.f(n) - 1] = 1
    out.append(tuple(v))
    return out


def center_comparison(n: int) -> dict:
    """Kernel of the Delta commutation matrix against both readings of the center generators."""
    from .lattice import Lattice

    T = delta_torus(n)
    K = T.kernel()
    out = {
        "n": n,
        "kernel_basis": [list(b) for b in K.basis],
        "rank": K.rank,
        "saturated": K.is_saturated(),
    }
    for pairing in ("formula", "shifted"):
        gens = center_generators(n, pairing)
        out[f"{pairing}_generators"] = [list(v) for v in gens]
        out[f"{pairing}_verdict"] = "match" if Lattice(T.N, gens) == K else "mismatch"
    out["verdict"] = out["formula_verdict"]
    return out
