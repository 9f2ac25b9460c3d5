import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qpquant.brace import (BoundOverflow, BraceModel, ce_cohomology_dims, ce_map_residual,
                           cofree_colie_lift, colie_lift_residual, coproduct, deformed_diff,
                           deformed_product, gerstenhaber_residuals, lg_functor, random_element,
                           rescale_nu, shuffle_product)
from qpquant.lie import LieAlgebra, abelian, coboundary_cobracket, sl2, wedge
from qpquant.uea import UEA

SL2 = sl2()
DELTA = coboundary_cobracket(SL2, wedge(SL2, {("e", "f"): 1}))
MODEL = BraceModel(UEA(SL2), order=3, outer=7, arity=8)


@given(st.integers(0, 10_000))
@settings(max_examples=15)
def test_deformed_product_associative(seed):
    rng = random.Random(seed)
    a, b, c = (random_element(MODEL, rng, 2, 1, 2, 3) for _ in range(3))
    assert deformed_product(deformed_product(a, b), c) == deformed_product(a, deformed_product(b, c))


@given(st.integers(0, 10_000))
@settings(max_examples=15)
def test_deformed_diff_squares_to_zero(seed):
    a = random_element(MODEL, random.Random(seed), 2, 2, 2, 3)
    assert not deformed_diff(deformed_diff(a))


E, F, H = 0, 1, 2


def test_unit_and_shuffle():
    one = MODEL.unit()
    x = MODEL.word(((E,), (F,)))
    y = MODEL.word(((H,),))
    assert deformed_product(one, x) == x == deformed_product(x, one)
    # x has degree 1 and y degree 0, so both shuffles carry sign +1
    assert shuffle_product(x, y) == MODEL.word(((E,), (F,)), ((H,),)) + MODEL.word(((H,),), ((E,), (F,)))


def test_coproduct_is_deconcatenation():
    a, b = ((E,),), ((F,),)
    assert coproduct(MODEL.word(a, b)) == {
        ((), (a, b), 0, 0): 1, ((a,), (b,), 0, 0): 1, ((a, b), (), 0, 0): 1}


def test_rescale_nu_counts_length():
    x = MODEL.word(((E,),), ((F,),))
    assert set(rescale_nu(x).terms) == {((((E,),), ((F,),)), 0, -2)}


def test_model_bounds():
    small = BraceModel(UEA(SL2), order=3, outer=3, arity=2)
    a = small.word(((E,), (F,)))
    with pytest.raises(BoundOverflow):
        deformed_product(a, a)


def test_ce_model_d_squared_and_gerstenhaber():
    C = lg_functor(SL2, DELTA)
    assert len(C.basis(3)) == 8
    assert all(not C.D(C.D(C.element(w))).terms for w in C.basis(3))
    e, f, h = (C.element((i,)) for i in range(3))
    assert gerstenhaber_residuals(C, e, f, h) == {}
    assert gerstenhaber_residuals(C, C.element((0, 1)), h, C.element((1, 2))) == {}


def test_ce_maps():
    C = lg_functor(SL2, DELTA)
    t = Fraction(3)
    assert ce_map_residual(C, C, {0: {0: t}, 1: {1: 1 / t}, 2: {2: Fraction(1)}}) == []
    bad = ce_map_residual(C, C, {0: {0: t}, 1: {1: t}, 2: {2: Fraction(1)}})
    assert bad[0][0] == "bracket" and bad[0][1] == (0, 1)
    assert bad[0][2].terms == {(2,): 8}


def test_ce_cohomology():
    A = LieAlgebra(("x", "y"), (0, 1), {})
    assert ce_cohomology_dims(lg_functor(A, {}, {0: {1: Fraction(1)}}), 4) == {(0, 0): 1}
    assert ce_cohomology_dims(lg_functor(A, {}), 3) == {
        (0, 0): 1, (1, 1): 1, (1, 2): 1, (2, 3): 1, (2, 4): 1, (3, 5): 1, (3, 6): 1}


@pytest.mark.parametrize("k", [2, 3])
def test_cofree_lift(k):
    for g in range(3):
        assert colie_lift_residual({g: 1}, DELTA, k) == {}
    lift = cofree_colie_lift({0: 1}, DELTA, k)
    assert lift[(0,)] == 1
    assert any(len(w) == 2 for w in lift)


def test_cofree_lift_bound():
    with pytest.raises(BoundOverflow):
        cofree_colie_lift({0: 1}, DELTA, 4)


def test_abelian_lift_is_trivial():
    A = abelian(2)
    delta = coboundary_cobracket(A, wedge(A, {(0, 1): 1}))
    assert cofree_colie_lift({0: 1}, delta, 3) == {(0,): 1}
