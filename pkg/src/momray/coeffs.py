"""Combinatorial and analytic coefficients of the inversion machinery.

Exact rationals: extended binomials, double factorials, the beta(m, k, p)
table (recurrence and closed form), and the rational prefactor relating the
algebraic data to the Fourier-side data.  Float64: the Gamma-function
coefficients entering the discretized pipeline.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "double_factorial",
    "binom_ext",
    "beta_support",
    "beta_recurrence",
    "beta_closed",
    "c_coeff",
    "f_factor",
    "h_factor",
]


def double_factorial(v: int) -> int:
    """v!! = v * (v-2) * ... down to 1 or 2, with (-1)!! = 0!! = 1.

    Defined for any integer v >= -1; even arguments occur in the dimensional
    coefficients whenever the ambient dimension is odd.
    """
    if v < -1:
        raise ValueError(f"double_factorial needs an integer >= -1, got {v}")
    out = 1
    while v > 1:
        out *= v
        v -= 2
    return out


def binom_ext(k: int, p: int) -> int:
    """Binomial coefficient extended by C(k, p) = 0 if k < 0, p < 0 or k < p."""
    if k < 0 or p < 0 or k < p:
        return 0
    return math.comb(k, p)


def beta_support(m: int, k: int, p: int) -> bool:
    """True where beta(m, k, p) may be nonzero: 1 <= k <= m, 0 <= p <= min(k, m-k)."""
    return k >= 1 and k <= m and p >= 0 and p <= min(k, m - k)


@lru_cache(maxsize=None)
def beta_recurrence(m: int, k: int, p: int) -> Fraction:
    """beta(m, k, p) by the promotion recurrence in m, starting from the empty m=0 table."""
    if not beta_support(m, k, p):
        return Fraction(0)
    mm = m - 1  # promote from rank mm to rank mm+1 = m
    if (k, p) == (1, 0):
        return (2 * mm + 1) * (Fraction(beta_recurrence(mm, 1, 0), 2 * mm - 1) + 1)
    if (k, p) == (1, 1):
        return (2 * mm + 1) * (Fraction(beta_recurrence(mm, 1, 1), 2 * mm - 1) - mm)
    return (2 * mm + 1) * (
        Fraction(beta_recurrence(mm, k, p), 2 * mm - 2 * k + 1)
        - Fraction(k - p, k) * beta_recurrence(mm, k - 1, p)
        + Fraction(mm - k - p + 2, k) * beta_recurrence(mm, k - 1, p - 1)
    )


def beta_closed(m: int, k: int, p: int) -> Fraction:
    """Closed form for beta(m, k, p), zero outside the support."""
    if not beta_support(m, k, p):
        return Fraction(0)
    sign = -1 if (k + p) % 2 == 0 else 1
    return (
        sign
        * Fraction(double_factorial(2 * m - 1), double_factorial(2 * m - 2 * k - 1))
        * Fraction(1, 2**p)
        * binom_ext(m, k)
        * binom_ext(m - k, p)
    )


def c_coeff(m: int, n: int, k: int) -> float:
    """Scalar coefficient of the k-th inversion operator, evaluated via log-Gamma."""
    if not (0 <= k <= m) or n < 2:
        raise ValueError(f"c_coeff needs 0 <= k <= m and n >= 2, got m={m}, n={n}, k={k}")
    sign = -1.0 if k % 2 else 1.0
    log_mag = (
        (m - 2) * math.log(2.0)
        + math.lgamma((2 * m + n - 1) / 2)
        - (n + 1) / 2 * math.log(math.pi)
        - math.log(double_factorial(n + 2 * m - 3))
        - 2 * math.lgamma(k + 1)
    )
    return sign * math.exp(log_mag)


def f_factor(m: int, k: int, n: int) -> float:
    """Scalar factor turning the contracted Fourier data into the algebraic data."""
    if not (0 <= k <= m):
        raise ValueError(f"f_factor needs 0 <= k <= m, got m={m}, k={k}")
    log_mag = (
        (m - 2) * math.log(2.0)
        + math.log(double_factorial(2 * m - 1))
        + math.lgamma((2 * m + n - 1) / 2)
        - (n + 1) / 2 * math.log(math.pi)
        - math.lgamma(k + 1)
    )
    return math.exp(log_mag)


def h_factor(m: int, k: int, n: int) -> Fraction:
    """Exact rational prefactor of the reduction to the algebraic system."""
    if not (0 <= k <= m):
        raise ValueError(f"h_factor needs 0 <= k <= m, got m={m}, k={k}")
    return Fraction(
        double_factorial(2 * m - 2 * k - 1) * double_factorial(n + 2 * m - 2 * k - 3),
        double_factorial(2 * m - 1) * double_factorial(n + 2 * m - 3),
    )
