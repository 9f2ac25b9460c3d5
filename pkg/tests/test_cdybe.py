from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from qpquant.cdybe import (DynamicalRMatrix, RationalField, Unsupported, alt_d, alternating, cdybe_residual,
                           cyb, h_equivariance_residual, solve_constant_Z)
from qpquant.graded import InvalidInput
from qpquant.lie import schouten_algebraic, sl2, wedge

SL2 = sl2()
LAM = sympy.Symbol("lam")


def rho_of(coeff, base=("h",)):
    return DynamicalRMatrix.build(SL2, list(base), {("e", "f"): coeff}, names=["lam"])


def coords(t):
    return {w: rho_of(1).field.K.to_sympy(c) for w, c in t.wedge_coords().items()}


def test_frozen_pieces_for_one_over_lambda():
    rho = rho_of("1/lam")
    assert coords(cyb(rho)) == {(0, 1, 2): LAM ** -2}
    assert coords(alt_d(rho)) == {(0, 1, 2): -LAM ** -2}
    assert coords(cdybe_residual(rho)) == {(0, 1, 2): 2 * LAM ** -2}
    assert cyb(rho).is_alternating() and alt_d(rho).is_alternating()


def test_no_constant_Z_for_one_over_lambda():
    rho = rho_of("1/lam")
    assert not cdybe_residual(rho).is_constant()
    assert solve_constant_Z(rho) is None


@given(st.builds(Fraction, st.integers(-9, 9), st.integers(1, 5)))
def test_residual_scales_as_c_squared_plus_c(c):
    rho = rho_of(sympy.Rational(c.numerator, c.denominator) / LAM)
    expected = sympy.Rational((c * c + c).numerator, (c * c + c).denominator) / LAM ** 2
    got = coords(cdybe_residual(rho)).get((0, 1, 2), 0)
    assert sympy.simplify(got - expected) == 0


def test_sign_flipped_rho_solves_with_zero():
    rho = rho_of("-1/lam")
    Z = solve_constant_Z(rho)
    assert Z is not None and Z.is_zero()
    assert cdybe_residual(rho).is_zero()


def test_constant_r_matches_half_schouten_square():
    r = wedge(SL2, {("e", "f"): 1})
    rho = rho_of(1)
    assert coords(cyb(rho)) == {(0, 1, 2): 1}
    assert schouten_algebraic(SL2, r, r).terms == {(0, 1, 2): 2}
    Z = solve_constant_Z(rho)
    assert coords(Z) == {(0, 1, 2): 1}
    assert cdybe_residual(rho, Z).is_zero()


@pytest.mark.parametrize("c", [1, -3, Fraction(2, 7)])
def test_residual_is_affine_in_Z(c):
    rho = rho_of("1/lam")
    Z = alternating(rho.field, {("e", "f", "h"): c}, 3)
    assert cdybe_residual(rho, Z) == cdybe_residual(rho) - Z


def test_equivariance():
    assert h_equivariance_residual(rho_of("1/lam")) == {}
    bad = DynamicalRMatrix.build(SL2, ["h"], {("e", "h"): "1/lam"}, names=["lam"])
    assert list(h_equivariance_residual(bad)) == ["h"]


def test_preconditions():
    rho = rho_of("1/lam")
    with pytest.raises(InvalidInput):
        cdybe_residual(rho, alternating(rho.field, {("e", "f", "h"): "lam"}, 3))
    with pytest.raises(Unsupported):
        h_equivariance_residual(DynamicalRMatrix.build(SL2, ["e", "f"], {("e", "f"): 1}))


@pytest.mark.parametrize("bad", [1.5, "1.5/lam", "mu/lam", True, [1]])
def test_parse_rejects(bad):
    with pytest.raises(InvalidInput):
        RationalField(("lam",)).parse(bad)


def test_parse_and_serialise():
    F = RationalField(("lam",))
    x = F.parse({"numerator": "1", "denominator": "lam"})
    assert F.to_json(x) == {"numerator": "1", "denominator": "lam"}
    assert F.parse(x) == x
    with pytest.raises(InvalidInput):
        F.parse({"numerator": "1", "denominator": "0"})
    with pytest.raises(InvalidInput):
        RationalField(("lambda",))
