import random

import pytest

from oracles import naive_normal_form
from qmrigid.pbw import check_relations, compose_endomorphisms, is_q_normal
from qmrigid.qfield import ONE, ZERO, q, qpow
from qmrigid.qmatrix import (
    BadIndexSet,
    MatrixIndexing,
    QuantumMatrices,
    build_presentation,
    chain_sum_exponents,
    eta_product,
    inversions,
    minor_commutation_exponents,
    swap_blocks,
)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_indexing_formulas(n):
    ix = MatrixIndexing(n)
    assert ix.N == n * n
    labels = set()
    for k in range(1, n + 1):
        for l in range(1, n + 1):
            i = ix.to_flat(k, l)
            assert ix.to_pos(i) == (k, l)
            assert ix.mu(i) == n + l - k
            assert ix.d(i) == n + 1 - max(k, l)
            labels.add(ix.mu(i))
            later = [j for j in range(i + 1, ix.N + 1) if ix.mu(j) == ix.mu(i)]
            assert ix.succ(i) == (min(later) if later else None)
    assert labels == set(range(1, 2 * n))
    chains = {tuple(ix.chain(ix.f(i))) for i in range(1, 2 * n)}
    assert sorted(x for c in chains for x in c) == list(range(1, ix.N + 1))
    for i in range(1, 2 * n):
        assert ix.f(i) == min(j for j in range(1, ix.N + 1) if ix.mu(j) == i)


def test_f_values():
    assert [MatrixIndexing(2).f(i) for i in range(1, 4)] == [2, 1, 3]
    assert [MatrixIndexing(3).f(i) for i in range(1, 6)] == [3, 2, 1, 4, 7]
    assert [MatrixIndexing(4).f(i) for i in range(1, 8)] == [4, 3, 2, 1, 5, 9, 13]


def test_presentation_n2():
    p = build_presentation(2)
    a = p.exp
    assert [a[1][0], a[2][0], a[3][1], a[3][2]] == [-1, -1, -1, -1]
    assert a[2][1] == 0 and a[3][0] == 0
    assert p.corr == {(4, 1): {(2, 3): -(q - qpow(-1))}}
    assert build_presentation(1).N == 1 and not build_presentation(1).corr


def test_inversions():
    assert inversions((0, 1, 2)) == 0
    assert inversions((2, 1, 0)) == 3


def test_minors():
    qm2 = QuantumMatrices(2)
    assert qm2.minor([2], [1]) == qm2.x(2, 1)
    assert qm2.minor([1, 2], [1, 2]).terms == {(1, 4): ONE, (2, 3): -q}
    qm3 = QuantumMatrices(3)
    m = qm3.minor([1, 2], [2, 3])
    ix = qm3.ix
    ref = naive_normal_form([(1, 2), (2, 3)], 3, q, qpow(-1), ONE, ZERO)
    for w, c in naive_normal_form([(1, 3), (2, 2)], 3, q, qpow(-1), ONE, ZERO).items():
        ref[w] = ref.get(w, ZERO) - q * c
    assert m.terms == {w: c for w, c in ref.items() if c}
    assert (ix.to_flat(1, 2), ix.to_flat(2, 3)) in m.terms


@pytest.mark.parametrize("rows,cols", [([1, 2], [1]), ([], []), ([2, 1], [1, 2]), ([1, 3], [1, 2]), ([1, 1], [1, 2])])
def test_bad_index_sets(rows, cols):
    with pytest.raises(BadIndexSet):
        QuantumMatrices(2).minor(rows, cols)


def test_special_minors():
    qm = QuantumMatrices(2)
    assert qm.special_minor(2) == qm.x(2, 1)
    assert qm.special_minor(3) == qm.x(1, 2)
    assert qm.special_minor(4) == qm.x(2, 2)
    assert qm.special_minor(1) == qm.minor([1, 2], [1, 2])
    qm3 = QuantumMatrices(3)
    assert len(qm3.special_minor(1).terms) == 6
    for i in range(1, 10):
        assert qm3.deltas[i - 1].degrees() == [qm3.ix.d(i)]
    # both branches of the case split
    assert qm3.ix.special_sets(2) == ((2, 3), (1, 2))
    assert qm3.ix.special_sets(4) == ((1, 2), (2, 3))


@pytest.mark.parametrize("n", [2, 3])
def test_special_minors_are_q_normal(n):
    qm = QuantumMatrices(n)
    for i in range(1, 2 * n):
        assert is_q_normal(qm.special_minor(qm.ix.f(i))) is not None


def test_determinant_is_central():
    qm = QuantumMatrices(2)
    det = qm.deltas[0]
    for g in qm.pres.gens():
        assert det * g == g * det


@pytest.mark.parametrize("n", [2, 3])
def test_commutation_matrix(n):
    B = minor_commutation_exponents(n)
    N = n * n
    assert all(B[i][j] == -B[j][i] for i in range(N) for j in range(N))
    assert B == chain_sum_exponents(n)
    D = QuantumMatrices(n).deltas
    rng = random.Random(n)
    for _ in range(10):
        i, j = rng.randrange(N), rng.randrange(N)
        assert D[i] * D[j] == (D[j] * D[i]).scale(qpow(B[i][j]))
    if n == 2:
        assert B[0] == [0, 0, 0, 0] and B[2][1] == 0
    with pytest.raises(ValueError):
        minor_commutation_exponents(5)


def _rand_c(rng, n):
    return [qpow(rng.randint(-3, 3)) * rng.choice([1, 2, -3]) for _ in range(2 * n)]


@pytest.mark.parametrize("n", [2, 3])
def test_torus_tau_eta(n):
    qm = QuantumMatrices(n)
    p = qm.pres
    assert qm.torus_action([q] * (2 * n)) == p.gens()
    tau = qm.transpose_tau()
    assert check_relations(tau, p).ok
    assert compose_endomorphisms(tau, tau) == p.gens()
    rng = random.Random(7 + n)
    for _ in range(50):
        c1, c2 = _rand_c(rng, n), _rand_c(rng, n)
        k1, k2 = rng.randint(0, 1), rng.randint(0, 1)
        e1, e2 = qm.eta(c1, k1), qm.eta(c2, k2)
        assert check_relations(e1, p).ok
        c3, k3 = eta_product(c1, k1, c2, k2)
        # (f o g)(x) = f(g(x)): images of the composite are f applied to g's images
        assert [qm.apply(e1, y) for y in e2] == qm.eta(c3, k3)
    c = _rand_c(rng, n)
    conj = [qm.apply(tau, qm.apply(qm.torus_action(c), t)) for t in tau]
    assert conj == qm.torus_action(swap_blocks(c))


def test_torus_action_needs_nonzero_entries():
    with pytest.raises(ValueError):
        QuantumMatrices(2).torus_action([1, 0, 1, 1])
