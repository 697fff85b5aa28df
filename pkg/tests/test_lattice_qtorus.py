from fractions import Fraction

from hypothesis import given, settings, strategies as st
import pytest

from qmrigid.lattice import Lattice, hnf_with_transform, integer_kernel, is_saturated, smith_invariants
from qmrigid.qfield import ONE, q, qpow
from qmrigid.qmatrix import build_presentation, minor_commutation_exponents
from qmrigid.qtorus import (
    ExponentMatrix,
    MatrixMismatch,
    QuantumTorus,
    center_basis,
    graded_component,
    kernel_lattice,
    saturation_of_torus,
    torus_multiply,
)

small = st.integers(-4, 4)
mats = st.integers(1, 4).flatmap(lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=1, max_size=4))


def _rank_q(rows):
    M = [[Fraction(x) for x in r] for r in rows]
    r = 0
    for col in range(len(M[0]) if M else 0):
        piv = next((i for i in range(r, len(M)) if M[i][col]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(len(M)):
            if i != r and M[i][col]:
                f = M[i][col] / M[r][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
    return r


@settings(max_examples=80, deadline=None)
@given(mats)
def test_hnf_transform(rows):
    H, U = hnf_with_transform(rows)
    prod = [[sum(U[i][k] * rows[k][j] for k in range(len(rows))) for j in range(len(rows[0]))] for i in range(len(U))]
    assert prod == [list(h) for h in H]
    assert abs(_det([list(r) for r in U])) == 1


def _det(M):
    M = [[Fraction(x) for x in r] for r in M]
    n, d = len(M), Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if M[i][c]), None)
        if p is None:
            return 0
        if p != c:
            M[c], M[p] = M[p], M[c]
            d = -d
        d *= M[c][c]
        for i in range(c + 1, n):
            f = M[i][c] / M[c][c]
            M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return d


@settings(max_examples=80, deadline=None)
@given(mats)
def test_integer_kernel(rows):
    K = integer_kernel(rows)
    ncols = len(rows[0])
    for v in K:
        assert all(sum(a * b for a, b in zip(r, v)) == 0 for r in rows)
    assert len(K) == ncols - _rank_q(rows)
    if K:
        assert Lattice(ncols, K).is_saturated()


def test_lattice_basics():
    assert not is_saturated(Lattice(2, [(2, 0)]))
    assert is_saturated(Lattice(2, [(1, 1)]))
    assert smith_invariants([(2, 0), (0, 3)]) == [1, 6]
    L = Lattice(3, [(1, 2, 0), (0, 0, 3)])
    assert (2, 4, 3) in L and (1, 2, 1) not in L
    assert Lattice(3, [(1, 2, 3), (1, 2, 0)]) == Lattice(3, [(1, 2, 0), (0, 0, 3)])


def test_kernel_examples():
    assert kernel_lattice([[0, 0], [0, 0]]) == Lattice(2, [(1, 0), (0, 1)])
    assert kernel_lattice([[0, 1], [-1, 0]]).rank == 0
    assert center_basis([[0, 1], [-1, 0]]) == []
    A = build_presentation(2).exp
    assert kernel_lattice(A) == Lattice(4, [(1, 0, 0, 1), (0, 1, -1, 0)])
    assert saturation_of_torus(A)


def test_exponent_matrix_validation():
    with pytest.raises(ValueError):
        ExponentMatrix([[0, 1], [1, 0]])
    with pytest.raises(ValueError):
        ExponentMatrix([[1, 0], [0, 0]])


def test_torus_multiply():
    T = QuantumTorus(build_presentation(2).exp)
    Y1, Y2 = T.gen(1), T.gen(2)
    assert torus_multiply(Y2, Y1) == T.monomial((1, 1, 0, 0), qpow(-1))
    assert Y1 * Y2 == T.monomial((1, 1, 0, 0))
    m = (1, -2, 3, 1)
    prod = T.monomial(m) * T.monomial(tuple(-x for x in m))
    (key, c), = prod.terms.items()
    assert key == (0, 0, 0, 0) and c.q_exponent() is not None
    z = T.monomial((1, 0, 0, 1))
    assert z * Y2 == Y2 * z and z.is_central()
    other = QuantumTorus([[0, 1], [-1, 0]])
    with pytest.raises(MatrixMismatch):
        Y1 * other.gen(1)


def test_torus_associativity_and_inverse():
    T = QuantumTorus(minor_commutation_exponents(2))
    a = T.element({(1, 0, 2, 0): q, (0, 1, -1, 0): ONE})
    b = T.element({(0, -1, 0, 1): ONE + q})
    c = T.element({(2, 0, 0, -1): qpow(3)})
    assert (a * b) * c == a * (b * c)
    assert T.gen(2, -1) * T.gen(2) == T.one()


@pytest.mark.parametrize("n", [2, 3])
def test_central_monomials_are_the_kernel(n):
    import itertools

    T = QuantumTorus(minor_commutation_exponents(n))
    K = kernel_lattice(T.matrix)
    gens = [T.gen(i) for i in range(1, T.N + 1)]
    span = range(-1, 2) if n == 2 else range(0, 2)
    for m in itertools.product(span, repeat=T.N):
        y = T.monomial(m)
        assert all(y * g == g * y for g in gens) == (m in K)


def test_delta_center():
    T = QuantumTorus(minor_commutation_exponents(2))
    assert kernel_lattice(T.matrix) == Lattice(4, [(1, 0, 0, 0), (0, 1, -1, 0)])


def test_graded_component():
    T = QuantumTorus(minor_commutation_exponents(2), degree=(2, 1, 1, 1))
    e = T.gen(1) + T.monomial((0, 1, 1, 0))
    assert graded_component(e, (2, 1, 1, 1), 2) == e
    assert graded_component(e, (2, 1, 1, 1), 1).is_zero()
    assert graded_component(T.one().scale(q), (2, 1, 1, 1), 0) == T.one().scale(q)
    for i, d in enumerate((2, 1, 1, 1), start=1):
        assert T.gen(i).degrees() == [d]
    with pytest.raises(ValueError):
        graded_component(e, (0, 1, 1, 1), 0)
