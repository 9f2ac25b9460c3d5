from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qpquant import examples
from qpquant.cochain import (ArityOverflow, Associator, Twist, TwistedCoproduct, as_cochain,
                             associator_from_Z, brace, diagonal_invariance, gerstenhaber_bracket,
                             hochschild_diff, lie_tensor_to_u, multiplication, pentagon_residual,
                             twist_conjugate, twist_conjugate_inverse, twist_residual)
from qpquant.graded import InvalidInput
from qpquant.lie import RejectedPrecondition, sl2
from qpquant.uea import UEA

U = UEA(sl2())
ONE2 = U.unit(2)
R_T = lie_tensor_to_u(examples.sl2_r(U.lie), U).hbar_shift(1)


@st.composite
def cochains(draw, arities=(1, 2), max_len=2):
    n = draw(st.sampled_from(arities))
    slot = st.lists(st.sampled_from("efh"), max_size=max_len).map(tuple)
    terms = draw(st.lists(st.tuples(st.tuples(*[slot] * n), st.integers(-2, 2)), min_size=1, max_size=2))
    return U.element(terms, n)


def gdeg(x):
    return x.n - 1


def test_frozen_hochschild_diff():
    x = U.element([((("e",), ("f", "h")), 1), ((("h",), ()), 2)], 2)
    assert str(hochschild_diff(x)) == "[3] -1 e(x)f(x)h + -1 e(x)h(x)f + 2 h(x)1(x)1"
    assert str(multiplication(U)) == "1 1(x)1"


def test_lie_tensor_embedding_is_alternating():
    assert str(lie_tensor_to_u(examples.sl2_r(U.lie), U)) == "1 e(x)f + -1 f(x)e"


@given(cochains(arities=(1, 2, 3)))
def test_b_squared_is_zero(x):
    d = hochschild_diff(x)
    assert all(t.is_zero() for t in hochschild_diff(d).comps.values())


@given(cochains(), cochains())
def test_gerstenhaber_graded_antisymmetry(a, b):
    s = -1 if (gdeg(a) * gdeg(b)) % 2 else 1
    assert gerstenhaber_bracket(a, b) == gerstenhaber_bracket(b, a) * (-s)


@given(cochains(arities=(1, 2), max_len=1), cochains(arities=(1, 2), max_len=1),
       cochains(arities=(1, 2), max_len=1))
def test_gerstenhaber_jacobi(a, b, c):
    br = gerstenhaber_bracket
    s = -1 if (gdeg(a) * gdeg(b)) % 2 else 1
    assert br(a, br(b, c)) == br(br(a, b), c) + br(b, br(a, c)) * s


@given(cochains(arities=(1, 2)))
def test_b_is_bracket_with_multiplication(x):
    m = multiplication(U)
    assert hochschild_diff(x) == gerstenhaber_bracket(m, x)


def test_b_nonzero_on_non_primitive():
    x = U.element([((("e", "e"), ("f",)), 1)], 2)
    assert hochschild_diff(x).comps


def test_arity_zero_rejected():
    with pytest.raises(InvalidInput):
        as_cochain(U.unit(0))


def test_arity_bound():
    x = U.element([((("e",), ("f",)), 1)], 2)
    with pytest.raises(ArityOverflow):
        gerstenhaber_bracket(x, x, arity_bound=2)


def test_associator_validation():
    bad = U.unit(3) + U.element([((("e",), (), ()), 1)], 3).hbar_shift(2)
    with pytest.raises(RejectedPrecondition):
        Associator.build(bad)
    with pytest.raises(InvalidInput):
        Associator.build(U.unit(3) + U.element([((("e",), (), ()), 1)], 3).hbar_shift(1))
    with pytest.raises(InvalidInput):
        Associator.build(ONE2)


def test_associator_from_Z_satisfies_pentagon():
    phi = associator_from_Z(examples.sl2_Z(U.lie), U)
    assert diagonal_invariance(phi.phi) == []
    assert pentagon_residual(phi).is_zero()


def test_twist_associators_invariance_orders():
    first = ONE2 + R_T * Fraction(1, 2)
    expo = first + R_T * R_T * Fraction(1, 8)
    frozen = examples.sl2_twist(U)
    for J, good in ((first, 1), (expo, 1), (frozen, 2)):
        P = Twist(J).associator()
        assert diagonal_invariance(P.truncate(good)) == []
        assert diagonal_invariance(P.truncate(good + 1)) != []
        assert twist_residual(J, P).is_zero()


def test_first_order_twist_residual_against_trivial_phi():
    J = ONE2 + R_T * Fraction(1, 2)
    res = twist_residual(J, U.unit(3))
    assert res.truncate(1).is_zero()
    assert res.hbar_valuation() == 2


@given(cochains(arities=(1, 2, 3)))
def test_twist_conjugation_round_trip(x):
    F = examples.sl2_twist(U).inverse()
    assert twist_conjugate_inverse(twist_conjugate(x, F), F) == as_cochain(x)


def test_twisted_coproduct_differs_from_plain():
    J = ONE2 + R_T * Fraction(1, 2)
    a = U.element([((("e", "f"),), 1)], 1)
    b = U.element([((("f",), ("h",)), 1)], 2)
    plain = gerstenhaber_bracket(a, b)
    twisted = gerstenhaber_bracket(a, b, coproduct=TwistedCoproduct(J))
    assert plain.comps.keys() == twisted.comps.keys()
    assert (plain - twisted).comps and all(t.hbar_valuation() >= 1 for t in (plain - twisted).comps.values())


def test_brace_mutated_sign_differs():
    a = U.element([((("e",), ("f",)), 1)], 2)
    b = U.element([((("h",), ("e",)), 1)], 2)
    assert brace(a, b) != brace(a, b, eps_sign=-1)
