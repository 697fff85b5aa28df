"""Quadratic algebras with a PBW basis of sorted words.

A :class:`Presentation` on generators ``X_1 .. X_N`` (1-based labels) fixes,
for every pair ``j > i``, a straightening rule

    X_j X_i = q^{a_ji} X_i X_j + c_ji

where ``c_ji`` is a combination of sorted two-letter words whose first letter
is smaller than ``j``.  That first-letter condition makes every rewrite step
strictly decrease a word lexicographically, so normal forms always exist and
the engine below terminates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .qfield import ONE, ZERO, Scalar, as_scalar, qpow

Word = Tuple[int, ...]
Terms = Dict[Word, Scalar]

__all__ = [
    "Presentation",
    "PBWElement",
    "PresentationError",
    "PresentationMismatch",
    "ZeroElement",
    "RelationReport",
    "normalize",
    "multiply",
    "apply_endomorphism",
    "compose_endomorphisms",
    "check_relations",
    "is_q_normal",
]


class PresentationError(ValueError):
    pass


class PresentationMismatch(ValueError):
    pass


class ZeroElement(ValueError):
    pass


def _add_into(acc: Terms, word: Word, coeff: Scalar) -> None:
    c = acc.get(word)
    if c is None:
        acc[word] = coeff
    else:
        c = c + coeff
        if c.is_zero():
            del acc[word]
        else:
            acc[word] = c


class Presentation:
    """Generators, q-commutation exponents, two-letter corrections, degrees.

    ``exp`` is a full N x N antisymmetric integer matrix (0-based storage)
    with ``exp[j-1][i-1] == a_ji``.  ``corr`` maps ``(j, i)`` with ``j > i``
    to a dict of sorted two-letter words and their coefficients.
    """

    def __init__(
        self,
        N: int,
        exp: Sequence[Sequence[int]],
        corr: Optional[Mapping[Tuple[int, int], Mapping[Word, Scalar]]] = None,
        degree: Optional[Sequence[int]] = None,
        name: str = "",
    ):
        if N < 0:
            raise PresentationError("N must be nonnegative")
        self.N = N
        self.name = name
        full = [[0] * N for _ in range(N)]
        for j in range(N):
            for i in range(j):
                a = int(exp[j][i])
                full[j][i] = a
                full[i][j] = -a
        self.exp = tuple(tuple(row) for row in full)
        self.degree = tuple(degree) if degree is not None else (1,) * N
        if len(self.degree) != N or any(d <= 0 for d in self.degree):
            raise PresentationError("degree vector must have N positive entries")
        self.corr: Dict[Tuple[int, int], Dict[Word, Scalar]] = {}
        for (j, i), terms in (corr or {}).items():
            if not (1 <= i < j <= N):
                raise PresentationError(f"correction index {(j, i)} out of range")
            clean = {}
            for word, c in terms.items():
                word = tuple(word)
                c = as_scalar(c)
                if c.is_zero():
                    continue
                if len(word) != 2:
                    raise PresentationError(
                        f"correction c_{j},{i} has a word of length {len(word)}; "
                        "only two-letter corrections are supported"
                    )
                u, v = word
                if not (1 <= u <= v <= N):
                    raise PresentationError(f"correction word {word} is not sorted")
                if u >= j:
                    raise PresentationError(
                        f"correction word {word} in c_{j},{i} breaks the "
                        "first-letter < j termination condition"
                    )
                clean[word] = c
            if clean:
                self.corr[(j, i)] = clean
        self._append_cache: Dict[Tuple[Word, int], Terms] = {}
        self._word_cache: Dict[Word, Terms] = {}

    # -- basic accessors ------------------------------------------------------

    def a(self, j: int, i: int) -> int:
        """Exponent with ``X_j X_i = q^a X_i X_j + ...`` (defined for any pair)."""
        return self.exp[j - 1][i - 1]

    def correction(self, j: int, i: int) -> "PBWElement":
        return PBWElement(self, dict(self.corr.get((j, i), {})))

    def gen(self, i: int) -> "PBWElement":
        if not 1 <= i <= self.N:
            raise IndexError(f"generator {i} out of range 1..{self.N}")
        return PBWElement(self, {(i,): ONE})

    def gens(self) -> List["PBWElement"]:
        return [self.gen(i) for i in range(1, self.N + 1)]

    def one(self) -> "PBWElement":
        return PBWElement(self, {(): ONE})

    def zero(self) -> "PBWElement":
        return PBWElement(self, {})

    def element(self, terms: Mapping[Iterable[int], object]) -> "PBWElement":
        """Build an element from arbitrary (not necessarily sorted) words."""
        acc: Terms = {}
        for word, c in terms.items():
            c = as_scalar(c)
            if c.is_zero():
                continue
            for w, d in self.normal_terms(tuple(word)).items():
                _add_into(acc, w, c * d)
        return PBWElement(self, acc)

    def word_degree(self, word: Word) -> int:
        deg = self.degree
        return sum(deg[g - 1] for g in word)

    def is_pure(self) -> bool:
        """True when there are no corrections (a quantum affine space)."""
        return not self.corr

    def same_as(self, other: "Presentation") -> bool:
        return (
            self.N == other.N
            and self.exp == other.exp
            and self.degree == other.degree
            and self.corr == other.corr
        )

    # -- rewriting ------------------------------------------------------------

    def append_letter(self, word: Word, x: int) -> Terms:
        """Normal form of ``word * X_x`` for a sorted ``word``."""
        if not word or word[-1] <= x:
            return {word + (x,): ONE}
        key = (word, x)
        cached = self._append_cache.get(key)
        if cached is not None:
            return cached
        head, y = word[:-1], word[-1]
        # head * X_y * X_x = q^a head * X_x * X_y + head * c_yx
        out: Terms = {}
        scale = qpow(self.a(y, x))
        for w, c in self.append_letter(head, x).items():
            for w2, c2 in self.append_letter(w, y).items():
                _add_into(out, w2, scale * c * c2)
        for (s, t), c in self.corr.get((y, x), {}).items():
            for w, c1 in self.append_letter(head, s).items():
                for w2, c2 in self.append_letter(w, t).items():
                    _add_into(out, w2, c * c1 * c2)
        self._append_cache[key] = out
        return out

    def normal_terms(self, word: Word) -> Terms:
        """Normal form of an arbitrary word, as a term dict (do not mutate)."""
        word = tuple(word)
        if all(word[p] <= word[p + 1] for p in range(len(word) - 1)):
            return {word: ONE}
        cached = self._word_cache.get(word)
        if cached is not None:
            return cached
        for g in word:
            if not 1 <= g <= self.N:
                raise IndexError(f"generator {g} out of range 1..{self.N}")
        acc: Terms = {(): ONE}
        for x in word:
            nxt: Terms = {}
            for w, c in acc.items():
                for w2, c2 in self.append_letter(w, x).items():
                    _add_into(nxt, w2, c * c2)
            acc = nxt
        self._word_cache[word] = acc
        return acc

    def multiply_words(self, u: Word, v: Word) -> Terms:
        """Normal form of ``u * v`` for sorted words ``u`` and ``v``."""
        if not u or not v or u[-1] <= v[0]:
            return {u + v: ONE}
        return self.normal_terms(u + v)

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "exp": [list(r) for r in self.exp],
            "degree": list(self.degree),
            "corrections": [
                {
                    "j": j,
                    "i": i,
                    "terms": [
                        {"word": list(w), "coeff": c.to_json()}
                        for w, c in sorted(terms.items())
                    ],
                }
                for (j, i), terms in sorted(self.corr.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Presentation":
        corr = {}
        for entry in data.get("corrections", []):
            corr[(entry["j"], entry["i"])] = {
                tuple(t["word"]): Scalar.from_json(t["coeff"]) for t in entry["terms"]
            }
        return cls(data["N"], data["exp"], corr, data.get("degree"))

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"<Presentation{label} N={self.N} corrections={len(self.corr)}>"


@dataclass(frozen=True, eq=False)
class PBWElement:
    """A finite combination of sorted words with nonzero Scalar coefficients."""

    pres: Presentation
    terms: Terms = field(default_factory=dict)

    # -- structure -------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def degrees(self) -> List[int]:
        return sorted({self.pres.word_degree(w) for w in self.terms})

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def degree(self) -> int:
        """Total degree of a nonzero homogeneous element."""
        ds = self.degrees()
        if len(ds) != 1:
            raise ValueError("element is zero or not homogeneous")
        return ds[0]

    def component(self, r: int) -> "PBWElement":
        deg = self.pres.word_degree
        return PBWElement(self.pres, {w: c for w, c in self.terms.items() if deg(w) == r})

    def letters(self) -> set:
        return {g for w in self.terms for g in w}

    def coeff(self, word: Iterable[int]) -> Scalar:
        return self.terms.get(tuple(word), ZERO)

    # -- arithmetic ------------------------------------------------------------

    def _check(self, other: "PBWElement") -> None:
        if other.pres is not self.pres:
            raise PresentationMismatch("elements live over different presentations")

    def _coerce(self, other):
        if isinstance(other, PBWElement):
            self._check(other)
            return other
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return PBWElement(self.pres, {(): s} if s else {})

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc = dict(self.terms)
        for w, c in other.terms.items():
            _add_into(acc, w, c)
        return PBWElement(self.pres, acc)

    __radd__ = __add__

    def __neg__(self):
        return PBWElement(self.pres, {w: -c for w, c in self.terms.items()})

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

    def scale(self, s) -> "PBWElement":
        s = as_scalar(s)
        if s.is_zero():
            return PBWElement(self.pres, {})
        return PBWElement(self.pres, {w: s * c for w, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, PBWElement):
            return multiply(self, other)
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
            raise ValueError("negative powers are not available in a PBW algebra")
        out = self.pres.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, PBWElement):
            return self.pres is other.pres and self.terms == other.terms
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return self.terms == ({(): s} if s else {})

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    # -- output ----------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "terms": [
                {"word": list(w), "coeff": c.to_json()} for w, c in sorted(self.terms.items())
            ]
        }

    @classmethod
    def from_json(cls, pres: Presentation, data: dict) -> "PBWElement":
        return pres.element({tuple(t["word"]): Scalar.from_json(t["coeff"]) for t in data["terms"]})

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in sorted(self.terms.items()):
            mono = "*".join(f"X{g}" for g in w) or "1"
            parts.append(f"({c})*{mono}" if w else f"({c})")
        return " + ".join(parts)

    def __repr__(self):
        return f"PBWElement({self})"


def normalize(word: Iterable[int], coeff=ONE, p: Presentation = None) -> PBWElement:
    """The unique normal-form expansion of ``coeff * X_{w1} ... X_{wk}``."""
    if p is None:
        raise TypeError("a presentation is required")
    coeff = as_scalar(coeff)
    if coeff.is_zero():
        return p.zero()
    return PBWElement(p, {w: coeff * c for w, c in p.normal_terms(tuple(word)).items()})


def multiply(a: PBWElement, b: PBWElement) -> PBWElement:
    a._check(b)
    p = a.pres
    acc: Terms = {}
    for u, cu in a.terms.items():
        for v, cv in b.terms.items():
            c = cu * cv
            for w, cw in p.multiply_words(u, v).items():
                _add_into(acc, w, c * cw)
    return PBWElement(p, acc)


def _check_images(images: Sequence[PBWElement], pres: Presentation) -> Presentation:
    if not images:
        return pres
    target = images[0].pres
    for im in images:
        if im.pres is not target:
            raise PresentationMismatch("generator images live over different presentations")
    return target


def apply_endomorphism(images: Sequence[PBWElement], e: PBWElement) -> PBWElement:
    """Image of ``e`` under the multiplicative extension of ``X_i -> images[i-1]``."""
    if len(images) != e.pres.N:
        raise PresentationMismatch(f"expected {e.pres.N} images, got {len(images)}")
    target = _check_images(images, e.pres)
    # prefix products are shared between words through this cache
    cache: Dict[Word, PBWElement] = {(): target.one()}

    def image_of(word: Word) -> PBWElement:
        got = cache.get(word)
        if got is None:
            got = image_of(word[:-1]) * images[word[-1] - 1]
            cache[word] = got
        return got

    acc: Terms = {}
    for w, c in e.terms.items():
        for w2, c2 in image_of(w).terms.items():
            _add_into(acc, w2, c * c2)
    return PBWElement(target, acc)


def compose_endomorphisms(f: Sequence[PBWElement], g: Sequence[PBWElement]) -> List[PBWElement]:
    """Generator images of ``f o g``."""
    return [apply_endomorphism(f, gi) for gi in g]


@dataclass
class RelationReport:
    residuals: Dict[Tuple[int, int], PBWElement]

    @property
    def ok(self) -> bool:
        return all(r.is_zero() for r in self.residuals.values())

    def failures(self) -> List[Tuple[int, int]]:
        return sorted(k for k, r in self.residuals.items() if not r.is_zero())

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "failures": [
                {"j": j, "i": i, "residual": self.residuals[(j, i)].to_json()}
                for j, i in self.failures()
            ],
        }


def check_relations(images: Sequence[PBWElement], p: Presentation) -> RelationReport:
    """Residuals ``im_j im_i - q^a_ji im_i im_j - c_ji(im)`` for every pair j > i."""
    if len(images) != p.N:
        raise PresentationMismatch(f"expected {p.N} images, got {len(images)}")
    _check_images(images, p)
    residuals = {}
    for j in range(1, p.N + 1):
        for i in range(1, j):
            xj, xi = images[j - 1], images[i - 1]
            r = xj * xi - (xi * xj).scale(qpow(p.a(j, i)))
            for (s, t), c in p.corr.get((j, i), {}).items():
                r = r - (images[s - 1] * images[t - 1]).scale(c)
            residuals[(j, i)] = r
    return RelationReport(residuals)


def q_commutation_exponent(a: PBWElement, b: PBWElement) -> Optional[int]:
    """Return ``m`` with ``a b = q^m b a`` exactly, or None if no such m exists."""
    ab = a * b
    ba = b * a
    if ab.is_zero() and ba.is_zero():
        return 0
    if ab.is_zero() or ba.is_zero() or set(ab.terms) != set(ba.terms):
        return None
    word = next(iter(ab.terms))
    m = (ab.terms[word] / ba.terms[word]).q_exponent()
    if m is None:
        return None
    if ab != ba.scale(qpow(m)):
        return None
    return m


def is_q_normal(e: PBWElement) -> Optional[Tuple[int, ...]]:
    """Exponents ``(m_1..m_N)`` with ``e X_g = q^m_g X_g e`` for every g, or None."""
    if e.is_zero():
        raise ZeroElement("q-normality is undefined for the zero element")
    out = []
    for g in e.pres.gens():
        m = q_commutation_exponent(e, g)
        if m is None:
            return None
        out.append(m)
    return tuple(out)
