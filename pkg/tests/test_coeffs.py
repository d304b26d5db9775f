"""Coefficient tables: double factorials, the beta table, scalar factors."""

from fractions import Fraction
from math import pi

import pytest

from momray.coeffs import (
    beta_closed,
    beta_recurrence,
    beta_support,
    binom_ext,
    c_coeff,
    double_factorial,
    f_factor,
    h_factor,
)


def test_double_factorial_small_values():
    assert [double_factorial(v) for v in (-1, 0, 1, 2, 3, 4, 5, 7)] == [
        1, 1, 1, 2, 3, 8, 15, 105,
    ]
    with pytest.raises(ValueError):
        double_factorial(-2)


def test_binom_ext_zero_outside_range():
    assert binom_ext(3, 5) == 0
    assert binom_ext(-1, 0) == 0
    assert binom_ext(3, -1) == 0
    assert binom_ext(5, 2) == 10


def test_beta_examples():
    assert beta_closed(1, 1, 0) == Fraction(1)
    assert beta_closed(2, 1, 1) == Fraction(-3)
    assert beta_closed(2, 1, 0) == Fraction(6)


def test_beta_zero_outside_support():
    assert not beta_support(2, 0, 0)
    assert beta_closed(2, 0, 0) == 0
    assert beta_closed(2, 3, 0) == 0
    assert beta_closed(3, 1, -1) == 0
    assert beta_recurrence(2, 2, 1) == 0  # p > m - k


def test_beta_closed_equals_recurrence_full_table():
    for m in range(0, 11):
        for k in range(-2, m + 3):
            for p in range(-2, m + 3):
                assert beta_closed(m, k, p) == beta_recurrence(m, k, p), (m, k, p)


def test_c_coeff_classical_value():
    assert c_coeff(0, 2, 0) == pytest.approx(1 / (4 * pi), rel=1e-14)


def test_c_coeff_sign_alternates_in_k():
    for k in range(3):
        assert (c_coeff(2, 2, k) < 0) == (k % 2 == 1)


def test_h_factor_values():
    assert h_factor(1, 0, 2) == 1
    assert h_factor(2, 0, 3) == 1
    # (2m-2k-1)!!(n+2m-2k-3)!! / ((2m-1)!!(n+2m-3)!!) at m=2, k=1, n=3:
    # 1!! * 2!! / (3!! * 4!!) = 2/24
    assert h_factor(2, 1, 3) == Fraction(1, 12)


def test_f_factor_classical_value():
    # m=k=0, n=2 reduces to Gamma(1/2)/(4 pi^(3/2)) = 1/(4 pi)
    assert f_factor(0, 0, 2) == pytest.approx(1 / (4 * pi), rel=1e-14)


def test_parameter_validation():
    with pytest.raises(ValueError):
        c_coeff(1, 2, 2)
    with pytest.raises(ValueError):
        f_factor(1, 2, 2)
    with pytest.raises(ValueError):
        h_factor(1, 2, 2)
