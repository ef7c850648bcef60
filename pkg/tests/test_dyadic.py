from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ultrashift import DomainError, DyadicValue


def test_canonical_form():
    v = DyadicValue(12, 5)
    assert (v.mantissa, v.shift) == (3, 3)
    assert DyadicValue(0, 9) == DyadicValue(0, 0)
    assert DyadicValue(8, 2) == DyadicValue(2, 0)


def test_rejects_negative():
    with pytest.raises(DomainError):
        DyadicValue(-1, 2)
    with pytest.raises(DomainError):
        DyadicValue(1, -2)


def test_symbolic():
    assert DyadicValue.power_of_two(-19).symbolic() == "2^-19"
    assert DyadicValue(1).symbolic() == "1"
    assert DyadicValue(0).symbolic() == "0"
    assert DyadicValue(5, 5).symbolic() == "5*2^-5"


def test_log2_only_for_powers():
    assert DyadicValue.power_of_two(-7).log2() == -7
    assert DyadicValue.power_of_two(3).log2() == 3
    with pytest.raises(DomainError):
        DyadicValue(3, 4).log2()


def test_from_fraction():
    assert DyadicValue.from_fraction(Fraction(5, 32)) == DyadicValue(5, 5)
    with pytest.raises(DomainError):
        DyadicValue.from_fraction(Fraction(1, 3))


dyadics = st.builds(DyadicValue, st.integers(0, 2 ** 70), st.integers(0, 90))


@given(dyadics, dyadics)
def test_arithmetic_matches_fractions(a, b):
    fa, fb = a.to_fraction(), b.to_fraction()
    assert (a + b).to_fraction() == fa + fb
    assert (a * b).to_fraction() == fa * fb
    assert (a < b) == (fa < fb)
    assert (a == b) == (fa == fb)
    if fa >= fb:
        assert (a - b).to_fraction() == fa - fb
