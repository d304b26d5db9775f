"""Exact radial-polynomial field ring: calculus rules and the A-field ladder."""

from fractions import Fraction

import numpy as np
import pytest

from momray import exactfield as xf


def scalar(mono, s, coef=1):
    """Single-term scalar field coef * y^mono * |y|^s."""
    return xf.RadialPolyField(len(mono), 0, ({(tuple(mono), s): Fraction(coef)},))


def test_partial_of_radial_power():
    # d/dy1 |y|^{-1} = -y1 |y|^{-3}
    f = xf.radial_power(2, -1)
    assert xf.canonical_eq(xf.partial(f, 0), scalar((1, 0), -3, -1))


def test_partial_product_rule():
    # d/dy1 (y1^2 |y|^{-1}) = 2 y1 |y|^{-1} - y1^3 |y|^{-3}
    f = scalar((2, 0), -1)
    expected = scalar((1, 0), -1, 2) + scalar((3, 0), -3, -1)
    assert xf.canonical_eq(xf.partial(f, 0), expected)


def test_mixed_partials_commute():
    f = xf.random_poly_field(3, 2, seed=9)
    f = xf.mul_radial(f, -3)
    d01 = xf.partial(xf.partial(f, 0), 1)
    d10 = xf.partial(xf.partial(f, 1), 0)
    assert xf.canonical_eq(d01, d10)


def test_canonical_eq_resolves_radial_relation():
    # y1^2 |y|^{-1} + y2^2 |y|^{-1} = |y| in R^2
    lhs = scalar((2, 0), -1) + scalar((0, 2), -1)
    assert xf.canonical_eq(lhs, xf.radial_power(2, 1))


def test_build_A_base_case():
    assert xf.canonical_eq(xf.build_A(0, 0, 2), xf.radial_power(2, -1))


def test_build_A_first_derivative():
    # A^(1,1) = d|y|^{-1} = -y |y|^{-3}
    A = xf.build_A(1, 1, 3)
    expected = xf.RadialPolyField(
        3,
        1,
        tuple(
            {(tuple(1 if j == a else 0 for j in range(3)), -3): Fraction(-1)}
            for a in range(3)
        ),
    )
    assert xf.canonical_eq(A, expected)


def test_euler_homogeneity_of_A():
    # sum_a y_a dA/dy_a = deg * A with deg = -(k+1) for A^(m,k)
    for m, k, n in ((1, 0, 2), (1, 1, 3), (2, 1, 2), (2, 2, 2)):
        A = xf.build_A(m, k, n)
        acc = xf.zero_field(n, A.m)
        for a in range(n):
            comps = tuple(xf._comp_mul_mono(c, a) for c in xf.partial(A, a).comps)
            acc = acc + xf.RadialPolyField(n, A.m, comps)
        assert xf.canonical_eq(acc, A.scale(-(k + 1))), (m, k, n)


def test_divergence_lowers_rank():
    f = xf.random_poly_field(2, 2, seed=3)
    assert xf.divergence(f).m == 1


def test_contract_mul_y_adjointish_rank_bookkeeping():
    f = xf.random_poly_field(3, 1, seed=4)
    assert xf.mul_y(f).m == 2
    assert xf.contract_y(xf.mul_y(f)).m == 1


def test_evaluate_on_grid_matches_closed_form():
    f = scalar((1, 1), -3, 2)  # 2 y1 y2 |y|^{-3}
    ax = np.linspace(-2, 2, 9)
    yy = np.meshgrid(ax, ax, indexing="ij", sparse=True)
    vals = xf.evaluate_on_grid(f, yy)[0]
    r = np.sqrt(yy[0] ** 2 + yy[1] ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        expected = np.where(r > 0, 2 * yy[0] * yy[1] / np.where(r > 0, r, 1) ** 3, 0.0)
    assert np.allclose(vals, expected, atol=1e-14)


def test_is_zero_field_detects_disguised_zero():
    f = scalar((2, 0), -1) + scalar((0, 2), -1) + xf.radial_power(2, 1).scale(-1)
    assert xf.is_zero_field(f)
