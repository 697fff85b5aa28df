"""Deleting derivations, one pivot at a time.

Stage ``k+1`` is an abstract PBW algebra (its :class:`Presentation` was
verified at the previous step).  Step ``k`` builds the new generators

    X'_j = sum_r c_r [delta_k^r sigma_k^-r (X_j)] X_k^-r      (j < k)

inside the localization at the pivot ``X_k`` and then re-derives the
presentation of the ``X'`` by multiplying them out and solving for the
two-letter corrections.  Nothing about the intermediate stages is assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg
from .pbw import PBWElement, Presentation, Terms, Word, _add_into
from .qfield import ONE, ZERO, Scalar, as_scalar, cauchon_coeff, qpow
from .qmatrix import MatrixIndexing, QuantumMatrices, build_presentation, minor_commutation_exponents
from .qtorus import QuantumTorus

__all__ = [
    "IndexOutOfScope",
    "NilpotencyBoundExceeded",
    "StageShapeViolation",
    "NotComposable",
    "SkewDerivation",
    "Localization",
    "LocElement",
    "StageState",
    "CauchonRun",
    "sigma_delta",
    "loc_push",
    "loc_multiply",
    "delete_derivation_step",
    "run_cauchon",
    "verify_theorem_ca1",
]

MAX_CAUCHON_N = 3


class IndexOutOfScope(ValueError):
    pass


class NilpotencyBoundExceeded(ArithmeticError):
    pass


class StageShapeViolation(ArithmeticError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotComposable(NotImplementedError):
    pass


def _word_sigma_exp(pres: Presentation, k: int, word: Word) -> int:
    return sum(pres.a(k, g) for g in word)


class SkewDerivation:
    """``sigma_k`` and ``delta_k`` on the subalgebra generated by ``X_1 .. X_{k-1}``.

    Read off ``X_k X_i = q^{a_ki} X_i X_k + c_ki``: ``sigma_k(X_i) = q^{a_ki} X_i``
    and ``delta_k(X_i) = c_ki``, extended by ``delta(ab) = sigma(a) delta(b) + delta(a) b``.
    """

    def __init__(self, pres: Presentation, k: int):
        if not 1 <= k <= pres.N:
            raise IndexError(f"pivot {k} out of range")
        self.pres = pres
        self.k = k
        for i in range(1, k):
            for (u, v) in pres.corr.get((k, i), {}):
                if v >= k:
                    raise IndexOutOfScope(
                        f"correction c_{k},{i} leaves the subalgebra below the pivot"
                    )
        self._delta_cache: Dict[Word, Terms] = {}

    def _scope(self, e: PBWElement) -> None:
        if e.pres is not self.pres:
            raise ValueError("element over a different presentation")
        for w in e.terms:
            if w and w[-1] >= self.k:
                raise IndexOutOfScope(f"word {w} involves a generator >= {self.k}")

    def sigma(self, e: PBWElement, power: int = 1) -> PBWElement:
        self._scope(e)
        out = {}
        for w, c in e.terms.items():
            s = power * _word_sigma_exp(self.pres, self.k, w)
            out[w] = c * qpow(s) if s else c
        return PBWElement(self.pres, out)

    def delta_word(self, word: Word) -> Terms:
        got = self._delta_cache.get(word)
        if got is not None:
            return got
        p, k = self.pres, self.k
        acc: Terms = {}
        shift = 0
        for pos, g in enumerate(word):
            c_kg = p.corr.get((k, g))
            if c_kg:
                pre, post = word[:pos], word[pos + 1:]
                scale = qpow(shift) if shift else ONE
                for (u, v), c in c_kg.items():
                    for w, cw in p.normal_terms(pre + (u, v) + post).items():
                        _add_into(acc, w, scale * c * cw)
            shift += p.a(k, g)
        self._delta_cache[word] = acc
        return acc

    def delta(self, e: PBWElement) -> PBWElement:
        self._scope(e)
        acc: Terms = {}
        for w, c in e.terms.items():
            for w2, c2 in self.delta_word(w).items():
                _add_into(acc, w2, c * c2)
        return PBWElement(self.pres, acc)

    def nilpotency(self, e: PBWElement, bound: int) -> int:
        """Smallest r with ``delta^r(e) == 0``."""
        r = 0
        while not e.is_zero():
            if r > bound:
                raise NilpotencyBoundExceeded(f"delta_{self.k} not nilpotent within {bound} steps")
            e = self.delta(e)
            r += 1
        return r

    def is_zero_map(self) -> bool:
        return not any((self.k, i) in self.pres.corr for i in range(1, self.k))


def sigma_delta(p: Presentation, k: int, e: PBWElement):
    """``(sigma_k(e), sigma_k^-1(e), delta_k(e))`` for ``e`` below the pivot."""
    sd = SkewDerivation(p, k)
    return sd.sigma(e), sd.sigma(e, -1), sd.delta(e)


# -- localization at the pivot --------------------------------------------------

LocTerms = Dict[Tuple[int, Word], Scalar]


class Localization:
    """Right-denominator arithmetic ``sum_m P_m X_k^-m`` in a stage algebra.

    Canonical form: for ``m > 0`` no word of ``P_m`` contains the pivot letter.
    Requires every generator above the pivot to q-commute with it.
    """

    def __init__(self, pres: Presentation, k: int, depth_bound: Optional[int] = None):
        self.pres = pres
        self.k = k
        self.sd = SkewDerivation(pres, k)
        for l in range(k + 1, pres.N + 1):
            if (l, k) in pres.corr:
                raise StageShapeViolation(
                    f"generator {l} does not q-commute with the pivot {k}"
                )
        if depth_bound is None:
            nil = max(
                (self.sd.nilpotency(pres.gen(i), pres.N + 1) for i in range(1, k)), default=0
            )
            depth_bound = nil + 1
        self.generator_nilpotency = depth_bound - 1
        self._push_cache: Dict[Word, LocTerms] = {}
        self._inv_cache: Dict[Tuple[int, Word], LocTerms] = {}

    # canonical accumulation
    def _high_shift(self, word: Word) -> int:
        """``s`` with ``w_> X_k^t = q^{t s} X_k^t w_>`` for the part of ``word`` above the pivot."""
        p, k = self.pres, self.k
        return sum(p.a(g, k) for g in word if g > k)

    def _add(self, acc: LocTerms, m: int, word: Word, c: Scalar) -> None:
        k = self.k
        if m > 0 and k in word:
            e = word.count(k)
            s = self._high_shift(word)
            lo = tuple(g for g in word if g < k)
            hi = tuple(g for g in word if g > k)
            if e >= m:
                c = c * qpow(-m * s) if s else c
                word = lo + (k,) * (e - m) + hi
                m = 0
            else:
                c = c * qpow(-e * s) if s else c
                word = lo + hi
                m = m - e
        key = (m, word)
        got = acc.get(key)
        if got is None:
            acc[key] = c
        else:
            got = got + c
            if got.is_zero():
                del acc[key]
            else:
                acc[key] = got

    def element(self, parts: Dict[int, PBWElement]) -> "LocElement":
        acc: LocTerms = {}
        for m, P in parts.items():
            for w, c in P.terms.items():
                self._add(acc, m, w, c)
        return LocElement(self, acc)

    def from_poly(self, e: PBWElement) -> "LocElement":
        return self.element({0: e})

    def pivot_inverse(self, power: int = 1) -> "LocElement":
        return LocElement(self, {(power, ()): ONE})

    # X_k^-1 * (word below the pivot)
    def _push_low(self, word: Word, depth: int = 0) -> LocTerms:
        if not word:
            return {(1, ()): ONE}
        got = self._push_cache.get(word)
        if got is not None:
            return got
        if depth > self.depth_limit(word):
            raise NilpotencyBoundExceeded(
                f"push of {word} past X_{self.k}^-1 did not terminate"
            )
        p, k = self.pres, self.k
        s = _word_sigma_exp(p, k, word)
        inv_s = qpow(-s) if s else ONE
        acc: LocTerms = {(1, word): inv_s}
        # - X_k^-1 delta(sigma^-1(word)) X_k^-1
        for w, c in self.sd.delta_word(word).items():
            for (m, w2), c2 in self._push_low(w, depth + 1).items():
                self._add(acc, m + 1, w2, -(inv_s * c * c2))
        self._push_cache[word] = acc
        return acc

    def depth_limit(self, word: Word) -> int:
        return len(word) * (self.generator_nilpotency + 1) + 1

    def _inv_times_word(self, m: int, word: Word) -> LocTerms:
        """Canonical terms of ``X_k^-m * word`` for any sorted word."""
        if m == 0:
            return {(0, word): ONE}
        key = (m, word)
        got = self._inv_cache.get(key)
        if got is not None:
            return got
        k = self.k
        lo = tuple(g for g in word if g < k)
        rest = tuple(g for g in word if g >= k)
        # X_k^-1 * lo, then (sum P_j X_k^-j) * rest = sum q^{j s} (P_j rest) X_k^-j
        first = self._push_low(lo)
        s = self._high_shift(rest)
        acc: LocTerms = {}
        p = self.pres
        for (j, w), c in first.items():
            c2 = c * qpow(j * s) if s else c
            for w2, c3 in p.multiply_words(w, rest).items():
                self._add(acc, j, w2, c2 * c3)
        if m > 1:
            out: LocTerms = {}
            for (j, w), c in acc.items():
                for (j2, w2), c2 in self._inv_times_word(m - 1, w).items():
                    self._add(out, j2 + j, w2, c * c2)
            acc = out
        self._inv_cache[key] = acc
        return acc

    def multiply(self, a: "LocElement", b: "LocElement") -> "LocElement":
        p = self.pres
        acc: LocTerms = {}
        for (m, u), cu in a.terms.items():
            for (n, v), cv in b.terms.items():
                c = cu * cv
                for (j, w), cw in self._inv_times_word(m, v).items():
                    cc = c * cw
                    for w2, c2 in p.multiply_words(u, w).items():
                        self._add(acc, j + n, w2, cc * c2)
        return LocElement(self, acc)


@dataclass(eq=False)
class LocElement:
    loc: Localization
    terms: LocTerms = field(default_factory=dict)

    @property
    def pivot(self) -> int:
        return self.loc.k

    @property
    def parts(self) -> Dict[int, PBWElement]:
        out: Dict[int, Terms] = {}
        for (m, w), c in self.terms.items():
            out.setdefault(m, {})[w] = c
        return {m: PBWElement(self.loc.pres, t) for m, t in sorted(out.items())}

    def part(self, m: int) -> PBWElement:
        return PBWElement(self.loc.pres, {w: c for (j, w), c in self.terms.items() if j == m})

    def is_zero(self) -> bool:
        return not self.terms

    def is_polynomial(self) -> bool:
        return all(m == 0 for m, _ in self.terms)

    def degrees(self) -> List[int]:
        deg = self.loc.pres.word_degree
        dk = self.loc.pres.degree[self.loc.k - 1]
        return sorted({deg(w) - m * dk for m, w in self.terms})

    def _coerce(self, other):
        if isinstance(other, LocElement):
            if other.loc is not self.loc:
                raise ValueError("elements of different localizations")
            return other
        if isinstance(other, PBWElement):
            return self.loc.from_poly(other)
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return LocElement(self.loc, {(0, ()): s} if s else {})

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        acc = dict(self.terms)
        for (m, w), c in other.terms.items():
            self.loc._add(acc, m, w, c)
        return LocElement(self.loc, acc)

    __radd__ = __add__

    def __neg__(self):
        return LocElement(self.loc, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def scale(self, s) -> "LocElement":
        s = as_scalar(s)
        if s.is_zero():
            return LocElement(self.loc, {})
        return LocElement(self.loc, {k: s * c for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (LocElement, PBWElement)):
            return self.loc.multiply(self, self._coerce(other))
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return self.scale(s)

    def __rmul__(self, other):
        if isinstance(other, PBWElement):
            return self.loc.multiply(self._coerce(other), self)
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return self.scale(s)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def to_json(self) -> dict:
        return {
            "pivot": self.loc.k,
            "terms": [
                {"inv_power": m, "word": list(w), "coeff": c.to_json()}
                for (m, w), c in sorted(self.terms.items())
            ],
        }

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for (m, w), c in sorted(self.terms.items()):
            mono = "*".join(f"X{g}" for g in w) or "1"
            if m:
                mono += f"*X{self.loc.k}^-{m}"
            parts.append(f"({c})*{mono}")
        return " + ".join(parts)

    def __repr__(self):
        return f"LocElement({self})"


def loc_push(loc: Localization, e: PBWElement) -> LocElement:
    """``X_k^-1 * e`` in canonical right-denominator form."""
    return loc.multiply(loc.pivot_inverse(), loc.from_poly(e))


def loc_multiply(a: LocElement, b: LocElement) -> LocElement:
    if a.loc is not b.loc:
        raise ValueError("elements of different localizations")
    return a.loc.multiply(a, b)


# -- the stage tower ----------------------------------------------------------------


@dataclass
class StageState:
    """Stage ``k``: the algebra generated by ``X^(k)_1 .. X^(k)_N``.

    ``expr[j-1]`` (when traced) writes ``X^(k)_j`` in the localization of the
    previous stage at its pivot ``k``.
    """

    k: int
    pres: Presentation
    expr: Optional[List[LocElement]] = None
    nilpotency: int = 0
    identity_step: bool = True

    def to_json(self) -> dict:
        out = {
            "pivot": self.k,
            "presentation": self.pres.to_json(),
            "identity_step": self.identity_step,
            "nilpotency": self.nilpotency,
        }
        if self.expr is not None:
            out["generators"] = [e.to_json() for e in self.expr]
        return out


def _stage_invariant(pres: Presentation, k: int) -> None:
    for (j, i) in pres.corr:
        if j >= k:
            raise StageShapeViolation(
                f"stage {k} still has a correction on the pair ({j}, {i})",
                pres.correction(j, i),
            )


def _candidate_words(N: int) -> List[Word]:
    return [(u, v) for u in range(1, N + 1) for v in range(u, N + 1)]


def delete_derivation_step(state: StageState, trace: bool = True) -> StageState:
    """From stage ``k+1`` to stage ``k`` (pivot ``k = state.k - 1``)."""
    prev = state.pres
    k = state.k - 1
    N = prev.N
    if not 2 <= k <= N:
        raise ValueError(f"pivot {k} out of range 2..{N}")
    _stage_invariant(prev, k + 1)
    loc = Localization(prev, k)
    sd = loc.sd
    new_gens: List[LocElement] = []
    for j in range(1, N + 1):
        x = prev.gen(j)
        if j >= k:
            new_gens.append(loc.from_poly(x))
            continue
        parts = {}
        r = 0
        term = x
        # delta^r sigma^-r (x) = q^{-r a_kj} delta^r(x)
        while not term.is_zero():
            if r > loc.generator_nilpotency:
                raise NilpotencyBoundExceeded(f"delta_{k}^{r}(X_{j}) != 0")
            scale = cauchon_coeff(r) * qpow(-r * prev.a(k, j))
            parts[r] = term.scale(scale)
            term = sd.delta(term)
            r += 1
        new_gens.append(loc.element(parts))

    identity = sd.is_zero_map()
    if set(prev.degree) == {1}:
        for g in new_gens:
            if g.degrees() != [1]:
                raise StageShapeViolation("new generator is not homogeneous of degree one", g)

    if identity:
        # only the r = 0 terms survive: the new generators are the old ones
        pres = prev
    else:
        pres = _rederive_presentation(prev, k, new_gens)
    _stage_invariant(pres, k)
    return StageState(
        k=k,
        pres=pres,
        expr=new_gens if trace else None,
        nilpotency=loc.generator_nilpotency,
        identity_step=identity,
    )


def _rederive_presentation(prev: Presentation, k: int, gens: Sequence[LocElement]) -> Presentation:
    """Match every pairwise product of the new generators against the quadratic template."""
    N = prev.N
    words = _candidate_words(N)
    columns = {w: gens[w[0] - 1] * gens[w[1] - 1] for w in words}
    rhs = {}
    for b in range(1, N + 1):
        for a in range(1, b):
            rhs[(b, a)] = gens[b - 1] * gens[a - 1] - columns[(a, b)].scale(qpow(prev.a(b, a)))
    rows: Dict[Tuple[int, Word], Dict] = {}
    for w, col in columns.items():
        for key, c in col.terms.items():
            rows.setdefault(key, {})[("w", w)] = c
    for pair, r in rhs.items():
        for key, c in r.terms.items():
            rows.setdefault(key, {})[("r", pair)] = -c
    unknowns = [("w", w) for w in words]
    ech = linalg.eliminate(rows.values(), unknowns)
    if ech.free:
        raise StageShapeViolation(
            f"stage {k}: products of new generators are linearly dependent"
        )
    bad = {t for row in ech.constraints for t in row}
    corr = {}
    for (b, a), r in rhs.items():
        if ("r", (b, a)) in bad:
            raise StageShapeViolation(
                f"stage {k}: X'_{b} X'_{a} - q^{prev.a(b, a)} X'_{a} X'_{b} "
                "is not a combination of two-letter words",
                r,
            )
        terms = {}
        for u in unknowns:
            c = ech.solution(u).get(("r", (b, a)))
            if c is not None and not c.is_zero():
                terms[u[1]] = c
        if (a, b) in terms:
            raise StageShapeViolation(
                f"stage {k}: the q-exponent of the pair ({b}, {a}) changed", r
            )
        if terms:
            corr[(b, a)] = terms
    try:
        return Presentation(N, prev.exp, corr, prev.degree, name=f"stage {k}")
    except ValueError as exc:
        raise StageShapeViolation(f"stage {k}: {exc}") from exc


@dataclass
class CauchonRun:
    n: int
    stages: List[StageState]

    @property
    def initial(self) -> Presentation:
        return self.stages[0].pres

    @property
    def final(self) -> Presentation:
        return self.stages[-1].pres

    def nontrivial_steps(self) -> List[int]:
        return [s.k for s in self.stages[1:] if not s.identity_step]

    def composed(self) -> List[LocElement]:
        """Final generators written over the original algebra.

        Only available when a single step is non-identity (so one pivot
        localization suffices).
        """
        steps = self.nontrivial_steps()
        if len(steps) > 1:
            raise NotComposable(f"{len(steps)} non-identity steps need nested localizations")
        orig = self.initial
        if not steps:
            loc = Localization(orig, orig.N) if orig.N >= 1 else None
            return [loc.from_poly(orig.gen(j)) for j in range(1, orig.N + 1)]
        stage = next(s for s in self.stages if s.k == steps[0])
        if stage.expr is None:
            raise NotComposable("run without trace")
        # identity steps before the pivot keep the old stage presentation, so
        # the traced expressions are already over the original generators
        if stage.expr[0].loc.pres is not orig and not stage.expr[0].loc.pres.same_as(orig):
            raise NotComposable("pivot stage is not over the original presentation")
        return stage.expr

    def to_json(self) -> dict:
        return {"n": self.n, "stages": [s.to_json() for s in self.stages]}


def run_cauchon(n: int, trace: bool = False, max_n: int = MAX_CAUCHON_N) -> CauchonRun:
    """Run every step from ``k = N`` down to ``k = 2`` on ``R_q[M_n]``."""
    if n > max_n:
        raise ValueError(f"n={n} exceeds the configured bound {max_n}")
    pres = build_presentation(n)
    N = pres.N
    state = StageState(k=N + 1, pres=pres)
    stages = [state]
    for _ in range(N, 1, -1):
        state = delete_derivation_step(state, trace=trace)
        stages.append(state)
    final = state.pres
    if final.corr:
        raise StageShapeViolation("final stage still has corrections")
    if final.exp != pres.exp:
        raise StageShapeViolation("final exponent matrix differs from the original one")
    return CauchonRun(n, stages)


# -- checking the minor formula for the final generators ---------------------------


@dataclass
class Ca1Report:
    n: int
    full_check: Dict[int, bool] = field(default_factory=dict)
    residuals: Dict[int, object] = field(default_factory=dict)
    torus_matrix: Optional[List[List[int]]] = None
    minor_matrix: Optional[List[List[int]]] = None

    @property
    def consistency(self) -> bool:
        return self.torus_matrix is not None and self.torus_matrix == self.minor_matrix

    @property
    def ok(self) -> bool:
        return self.consistency and all(self.full_check.values())

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "full_check": {str(i): v for i, v in sorted(self.full_check.items())},
            "consistency": self.consistency,
            "mismatches": [
                [i + 1, j + 1]
                for i in range(len(self.minor_matrix or []))
                for j in range(len(self.minor_matrix))
                if self.torus_matrix[i][j] != self.minor_matrix[i][j]
            ],
            "ok": self.ok,
        }


def delta_monomials(n: int) -> List[Tuple[int, ...]]:
    """Exponent vectors of ``X_i X_s(i) ... `` in the final torus coordinates."""
    ix = MatrixIndexing(n)
    out = []
    for i in range(1, ix.N + 1):
        v = [0] * ix.N
        for j in ix.chain(i):
            v[j - 1] = 1
        out.append(tuple(v))
    return out


def verify_theorem_ca1(n: int, run: Optional[CauchonRun] = None) -> Ca1Report:
    """Check ``Xbar_i * Delta_s(i) == Delta_i`` (n = 2) and the commutation consistency."""
    if run is None:
        run = run_cauchon(n, trace=True)
    qm = QuantumMatrices(n)
    report = Ca1Report(n)
    try:
        xbar = run.composed()
    except NotComposable:
        xbar = None
    if xbar is not None:
        for i in range(1, qm.N + 1):
            s = qm.ix.succ(i)
            lhs = xbar[i - 1] * qm.special_minor(s) if s is not None else xbar[i - 1]
            diff = lhs - qm.special_minor(i)
            report.full_check[i] = diff.is_zero()
            if not diff.is_zero():
                report.residuals[i] = diff
    torus = QuantumTorus(run.final.exp, name="final stage")
    mons = delta_monomials(n)
    N = qm.N
    T = [[0] * N for _ in range(N)]
    for i in range(N):
        yi = torus.monomial(mons[i])
        for j in range(N):
            yj = torus.monomial(mons[j])
            ab, ba = yi * yj, yj * yi
            ((m, c1),) = ab.terms.items()
            T[i][j] = (c1 / ba.terms[m]).q_exponent()
    report.torus_matrix = T
    report.minor_matrix = minor_commutation_exponents(n)
    return report
