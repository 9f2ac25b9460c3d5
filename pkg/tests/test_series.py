from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qpquant.series import HbarSeries

fracs = st.builds(Fraction, st.integers(-20, 20), st.integers(1, 6))
series = st.dictionaries(st.integers(0, 3), fracs, max_size=4).map(lambda d: HbarSeries(d, 3))
nonzero = st.builds(Fraction, st.integers(1, 20), st.integers(1, 6)) | st.builds(Fraction, st.integers(-20, -1), st.integers(1, 6))
units = st.tuples(nonzero, series).map(lambda p: p[1] - HbarSeries({0: p[1][0]}, 3) + HbarSeries({0: p[0]}, 3))


def test_truncation_drops_high_powers():
    s = HbarSeries({0: 1, 2: 5, 3: 7}, 3)
    assert s.truncate(2) == HbarSeries({0: 1, 2: 5}, 2)
    assert HbarSeries.hbar(2) * HbarSeries.hbar(2) == 0


def test_frozen_inverse():
    assert HbarSeries({0: 1, 1: 2}).inverse() == HbarSeries({0: 1, 1: -2, 2: 4, 3: -8})
    assert HbarSeries({0: 1, 1: 1}, 2) ** 3 == HbarSeries({0: 1, 1: 3, 2: 3}, 2)


def test_rejects_floats():
    with pytest.raises(TypeError):
        HbarSeries({0: 1.5})


def test_inverse_needs_unit():
    with pytest.raises(Exception):
        HbarSeries.hbar(1).inverse()


@given(series, series, series)
def test_ring_axioms(a, b, c):
    assert (a + b) * c == a * c + b * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a
    assert a - a == 0


@given(units)
def test_inverse_is_two_sided(u):
    assert u * u.inverse() == 1


@given(series)
def test_json_round_trip(a):
    assert HbarSeries.from_json(a.to_json(), 3) == a


@given(series, series)
def test_valuation_is_additive(a, b):
    if a.is_zero() or b.is_zero():
        return
    prod = a * b
    expected = a.valuation() + b.valuation()
    if expected <= 3:
        assert prod.valuation() == expected
    else:
        assert prod.is_zero()


def test_exact_fractions_only():
    s = HbarSeries({0: Fraction(1, 3)}) * 3
    assert s[0] == 1 and isinstance(s[0], Fraction)
