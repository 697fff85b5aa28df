"""Independent reference computations used only by the tests.

Nothing here imports the engine's rewriting code.  The naive rewriter works
on words of matrix positions ``(k, l)`` and applies the four defining
relations of quantum matrices to the leftmost out-of-order adjacent pair until
the word is sorted column-major.  Coefficients are of any field type; the
caller passes ``q`` and ``q^-1`` in that type.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

Pos = Tuple[int, int]


def flat(n: int, p: Pos) -> int:
    k, l = p
    return k + (l - 1) * n


def _swap(b: Pos, a: Pos, qv, qinv, one):
    """Rewrite ``x_b x_a`` (b after a in column-major order) as a list of (coeff, word)."""
    (kb, lb), (ka, la) = b, a
    if lb == la:
        # same column, ka < kb:  x_a x_b = q x_b x_a
        return [(qinv, (a, b))]
    if kb == ka:
        # same row, la < lb
        return [(qinv, (a, b))]
    if kb < ka:
        # b is up-right of a: commute
        return [(one, (a, b))]
    # ka < kb and la < lb:  x_a x_b - x_b x_a = (q - q^-1) x_{ka,lb} x_{kb,la}
    c = qv - qinv
    # x_{ka,lb} and x_{kb,la} commute; write them column-major
    u, v = (kb, la), (ka, lb)
    return [(one, (a, b)), (-c, (u, v))]


def naive_normal_form(word: Sequence[Pos], n: int, qv, qinv, one, zero) -> Dict[Tuple[int, ...], object]:
    """Normal form keyed by flat column-major words."""
    todo: Dict[Tuple[Pos, ...], object] = {tuple(word): one}
    done: Dict[Tuple[int, ...], object] = {}
    while todo:
        w, c = todo.popitem()
        for i in range(len(w) - 1):
            if flat(n, w[i]) > flat(n, w[i + 1]):
                for k, pair in _swap(w[i], w[i + 1], qv, qinv, one):
                    nw = w[:i] + pair + w[i + 2 :]
                    todo[nw] = todo.get(nw, zero) + c * k
                break
        else:
            key = tuple(flat(n, p) for p in w)
            done[key] = done.get(key, zero) + c
    return {k: v for k, v in done.items() if v != zero}


# -- linear algebra over Fractions (specialized q) ---------------------------------


def rank_fraction(rows: List[List[Fraction]]) -> int:
    M = [list(r) for r in rows]
    rank = 0
    ncols = len(M[0]) if M else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(M)) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        p = M[rank][col]
        for i in range(len(M)):
            if i != rank and M[i][col] != 0:
                f = M[i][col] / p
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


def degree_two_fix_minor_dimension(qv: Fraction) -> int:
    """Dimension of degree-2 perturbations at n=2 with x12, x21 and the determinant fixed.

    Phi(x11) = x11 + p, Phi(x22) = x22 + s with p, s arbitrary combinations of
    the 10 sorted quadratic words; x12, x21 untouched.  Linearize every
    defining relation and the determinant at degree 3 and count solutions.
    """
    n = 2
    qinv = 1 / qv
    one, zero = Fraction(1), Fraction(0)
    pos = [(1, 1), (2, 1), (1, 2), (2, 2)]
    quad = [(a, b) for i, a in enumerate(pos) for b in pos[i:]]
    unknowns = [("p", w) for w in quad] + [("s", w) for w in quad]
    moved = {(1, 1): "p", (2, 2): "s"}

    def nf(word):
        return naive_normal_form(word, n, qv, qinv, one, zero)

    equations: List[Dict] = []

    def linearize(terms):
        """terms: list of (coeff, word of positions); derivative in the unknown direction."""
        eq: Dict = {}
        for c, word in terms:
            for i, x in enumerate(word):
                if x in moved:
                    for w in quad:
                        for key, v in nf(word[:i] + w + word[i + 1 :]).items():
                            col = (moved[x], w)
                            eq.setdefault(key, {})
                            eq[key][col] = eq[key].get(col, zero) + c * v
        equations.extend(eq.values())

    # relations in the form  x_a x_b - coeff x_b x_a - corr = 0 for every ordered pair
    for i, a in enumerate(pos):
        for b in pos[i + 1 :]:
            terms = [(one, (b, a))]
            for k, pair in _swap(b, a, qv, qinv, one):
                terms.append((-k, pair))
            linearize(terms)
    # quantum determinant x11 x22 - q x12 x21
    linearize([(one, ((1, 1), (2, 2))), (-qv, ((1, 2), (2, 1)))])
    rows = [[eq.get(u, zero) for u in unknowns] for eq in equations]
    return len(unknowns) - rank_fraction(rows)
