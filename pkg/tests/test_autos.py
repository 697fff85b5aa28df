import random
from fractions import Fraction

import pytest

from oracles import degree_two_fix_minor_dimension
from qmrigid.autos import (
    FIX_MINORS,
    RELATIONS,
    ConsistencyViolation,
    CutoffMismatch,
    DegreeBudgetExceeded,
    NotCentral,
    NotPositivelyGraded,
    TruncatedSeries,
    UnipotentAut,
    apply_unipotent,
    central_family,
    central_unit_check,
    compose,
    delta_evaluate,
    delta_torus,
    grading_coincides,
    inverse,
    invert_one_plus,
    lift_unipotent,
    polynomial_inverse_obstruction,
    random_central_aut,
    satisfies_truncated,
    series_arith,
    solve_unipotent,
)
from qmrigid.pbw import check_relations
from qmrigid.qfield import ONE, Scalar, q, qpow
from qmrigid.qmatrix import QuantumMatrices
from qmrigid.qtorus import QuantumTorus


@pytest.fixture(scope="module")
def T2():
    return delta_torus(2)


def line_torus():
    # one commuting generator of degree 1, so Y is central of degree 1
    return QuantumTorus([[0]], degree=(1,))


def test_series_arith_examples(T2):
    u = TruncatedSeries(T2, 4, T2.gen(1) + T2.monomial((0, 1, 0, 1), q))
    one = TruncatedSeries.one(T2, 4)
    assert series_arith(one + u, one, "*") == one + u
    top = TruncatedSeries(T2, 4, T2.gen(1, 2))
    assert series_arith(top, top, "*").is_zero()
    assert series_arith(u, u, "-").is_zero()
    with pytest.raises(CutoffMismatch):
        series_arith(u, TruncatedSeries.one(T2, 3), "+")
    with pytest.raises(ValueError):
        series_arith(u, u, "/")


def test_invert_one_plus_examples(T2):
    assert invert_one_plus(TruncatedSeries.zero(T2, 4)).is_zero()
    top = TruncatedSeries(T2, 4, T2.gen(1, 2).scale(q))
    assert invert_one_plus(top) == -top
    L = line_torus()
    c = Scalar(3) * q
    u = TruncatedSeries(L, 3, L.gen(1).scale(c))
    v = invert_one_plus(u)
    want = L.gen(1).scale(-c) + L.gen(1, 2).scale(c * c) - L.gen(1, 3).scale(c * c * c)
    assert v.element == want
    one = TruncatedSeries.one(L, 3)
    assert (one + v) * (one + u) == one and (one + u) * (one + v) == one
    with pytest.raises(NotPositivelyGraded):
        invert_one_plus(TruncatedSeries(T2, 3, T2.monomial((0, 1, -1, 0))))


def test_geometric_series_random_central(T2):
    rng = random.Random(4)
    one = TruncatedSeries.one(T2, 6)
    for _ in range(20):
        phi = random_central_aut(T2, 6, rng, terms=2, span=2)
        for u in phi.u:
            v = invert_one_plus(u)
            assert (one + u) * (one + v) == one


def test_identity_automorphism(T2):
    idn = UnipotentAut.identity(T2, 4)
    assert idn.is_identity() and central_unit_check(idn)
    e = TruncatedSeries(T2, 4, T2.gen(2) * T2.gen(3, -1) + T2.gen(1))
    assert apply_unipotent(idn, e) == e


def test_compose_inverse_group_laws(T2):
    rng = random.Random(9)
    D = 5
    for _ in range(50):
        phi = random_central_aut(T2, D, rng, terms=2, span=2)
        psi = inverse(phi)
        assert compose(phi, psi).is_identity()
        assert compose(psi, phi).is_identity()
    a, b, c = (random_central_aut(T2, D, rng, span=2) for _ in range(3))
    lhs, rhs = compose(compose(a, b), c), compose(a, compose(b, c))
    assert all(x == y for x, y in zip(lhs.u, rhs.u))
    idn = UnipotentAut.identity(T2, D)
    assert all(x == y for x, y in zip(compose(a, idn).u, a.u))


def test_inverse_generator_image(T2):
    rng = random.Random(1)
    phi = random_central_aut(T2, 5, rng, span=2)
    for i in range(1, 5):
        S, m = phi.monomial_image(tuple(-1 if j == i - 1 else 0 for j in range(4)))
        u = phi.u[i - 1]
        # sum_r (-1)^r Y_i^-1 u_i^r, summed directly
        acc = TruncatedSeries.one(T2, 5)
        power = TruncatedSeries.one(T2, 5)
        for r in range(1, 6):
            power = power * u
            acc = acc + (power if r % 2 == 0 else -power)
        yinv = T2.gen(i, -1)
        assert S.element * T2.monomial(m) == yinv * acc.element


def test_central_unit_check(T2):
    rng = random.Random(2)
    assert central_unit_check(random_central_aut(T2, 4, rng))
    D = 3
    zero = TruncatedSeries.zero(T2, D)
    u = [TruncatedSeries(T2, D, T2.gen(2))] + [zero] * 3
    with pytest.raises(ConsistencyViolation) as err:
        UnipotentAut(T2, u)
    assert "(1, 4)" in str(err.value)
    bad = UnipotentAut(T2, u, check=False)
    assert bad.consistency_failures() and not central_unit_check(bad)


def test_obstruction(T2):
    assert polynomial_inverse_obstruction(T2.zero()) is True
    assert polynomial_inverse_obstruction(T2.gen(1).scale(3)) is False
    two = T2.gen(1) + T2.monomial((2, 1, -1, 0), q)
    assert polynomial_inverse_obstruction(two) is False
    rng = random.Random(100)
    for _ in range(100):
        terms = {}
        for _ in range(rng.randint(1, 3)):
            m = (rng.randint(1, 3), 0, 0, 0)
            b = rng.randint(-2, 2)
            m = (m[0], b, -b, 0)
            terms[m] = qpow(rng.randint(-2, 2)) * (rng.randint(1, 5) * rng.choice([1, -1]))
        u = T2.element(terms)
        assert polynomial_inverse_obstruction(u) is False
    with pytest.raises(NotCentral):
        polynomial_inverse_obstruction(T2.gen(2))
    with pytest.raises(NotPositivelyGraded):
        polynomial_inverse_obstruction(T2.monomial((0, 1, -1, 0)))


def test_grading_and_delta_evaluate(T2):
    assert grading_coincides(2) and grading_coincides(3)
    qm = QuantumMatrices(2)
    assert delta_evaluate(2, T2.gen(1) * T2.gen(4)) == qm.deltas[0] * qm.deltas[3]
    with pytest.raises(ValueError):
        delta_evaluate(2, T2.gen(1, -1))


def test_lift_of_central_family(T2):
    fam = central_family(2, 5)
    assert check_relations(fam, QuantumMatrices(2).pres).ok
    Y1 = T2.gen(1)
    # (1 + 5 Delta_1)^2 - 1; the square term has degree 4
    assert lift_unipotent(2, fam, 3).u[0] == Y1.scale(10)
    lift = lift_unipotent(2, fam, 4)
    assert lift.exists and lift.unique
    assert lift.u[0] == Y1.scale(10) + (Y1 * Y1).scale(25)
    for i in (1, 2, 3):
        assert lift.u[i] == Y1.scale(5)
    phi = lift.automorphism(2)
    assert central_unit_check(phi)


def test_solver_n1():
    rep = solve_unipotent(1, 4, (RELATIONS,))
    assert [p.solution_dim for p in rep.per_degree] == [1, 1, 1]
    assert rep.verdict == "nontrivial"


def test_solver_relations_only_n2():
    rep = solve_unipotent(2, 3, (RELATIONS,), with_basis=True)
    assert rep.verdict == "nontrivial"
    assert [p.solution_dim for p in rep.per_degree] == [4, 12]
    assert rep.contains(central_family(2, 1))
    assert rep.contains(central_family(2, qpow(-2) * 7))
    assert not rep.nonlinear
    assert rep.to_json()["per_degree"][0]["degree"] == 2


def _conjugation(n, D, k, l):
    """Images of ``u -> z u z^-1`` for ``z = 1 + x_kl``, cut at degree ``D``."""
    qm = QuantumMatrices(n)
    p = qm.pres
    x = qm.x(k, l)
    z = p.one() + x
    zinv = p.one()
    power = p.one()
    for r in range(1, D + 1):
        power = power * x
        zinv = zinv + (power if r % 2 == 0 else -power)
    out = []
    for g in p.gens():
        e = z * g * zinv
        out.append(p.element({w: c for w, c in e.terms.items() if len(w) <= D}))
    return out


def test_solver_fix_minors_n2():
    rep = solve_unipotent(2, 4, (RELATIONS, FIX_MINORS))
    dims = [p.solution_dim for p in rep.per_degree]
    assert dims == [2, 4, 6]
    # formal inner conjugations fix x12, x21 and the central determinant
    for kl in ((2, 1), (1, 2)):
        images = _conjugation(2, 4, *kl)
        assert rep.contains(images)
        assert satisfies_truncated(2, _conjugation(2, 5, *kl), 5, (RELATIONS, FIX_MINORS))
    assert not rep.contains(central_family(2, 1))


@pytest.mark.parametrize("qv", [Fraction(7, 3), Fraction(5), Fraction(-2, 11)])
def test_degree_two_oracle(qv):
    assert degree_two_fix_minor_dimension(qv) == 2


def test_solver_validation():
    with pytest.raises(DegreeBudgetExceeded):
        solve_unipotent(2, 7)
    with pytest.raises(ValueError):
        solve_unipotent(2, 3, ("bogus",))


def test_conjugation_lift_is_not_central(T2):
    # the formal conjugation lifts, but with a non-central u_4, so it cannot be
    # a bi-finite unipotent automorphism
    lift = lift_unipotent(2, _conjugation(2, 4, 2, 1), 3)
    assert lift.exists and lift.unique
    assert lift.u[0].is_zero()
    assert (0, 1, 0, 0) in lift.u[3].terms
    assert not all(T2.is_central_monomial(m) for m in lift.u[3].terms)
