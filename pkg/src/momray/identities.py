"""Exact verification of the tensor identities behind the inversion formula.

Each check constructs both sides of an identity inside the exact
radial-polynomial ring and compares them structurally, so a pass means the
identity holds with zero numerical error for the given parameters.
"""

from __future__ import annotations

import time
from fractions import Fraction
from math import comb, factorial

from . import exactfield as xf
from .coeffs import beta_closed, beta_recurrence, double_factorial, h_factor

__all__ = ["check_identity", "run_suite", "IDENTITY_NAMES", "default_cases"]


def _apply_n(op, f, times: int):
    for _ in range(times):
        f = op(f)
    return f


def _F_from_g(m: int, k: int, g: xf.RadialPolyField) -> xf.RadialPolyField:
    """Left-hand-side data of the derivative system: A^(m,0) contracted with d^k g."""
    dkg = _apply_n(xf.inner_d, g, k)
    return xf.field_contract(xf.build_A(m, 0, g.n), dkg)


def _H_from_F(m: int, k: int, n: int, F: list) -> xf.RadialPolyField:
    """Right-hand side of the reduced algebraic system (rational prefactor included)."""
    acc = xf.zero_field(n, m - k)
    for p in range(k + 1):
        term = _apply_n(xf.divergence, F[p], k - p)
        sign = Fraction(-1) ** p
        acc = acc + term.scale(sign * comb(k, p))
    return acc.scale(h_factor(m, k, n))


def _reconstruct_from_H(m: int, H: list) -> xf.RadialPolyField:
    """Unique solution of the algebraic system, given the rank m-k data H[k]."""
    n = H[0].n
    acc = xf.zero_field(n, m)
    for k in range(m + 1):
        for p in range(min(k, m - k) + 1):
            coef = (
                Fraction((-1) ** (k + p), double_factorial(2 * m - 2 * k - 1))
                * comb(m, k)
                * Fraction(comb(m - k, p), 2**p)
            )
            term = _apply_n(xf.contract_y, H[k], p)
            term = _apply_n(xf.mul_y, term, k - p)
            term = _apply_n(xf.delta_mul_field, term, p)
            acc = acc + term.scale(coef)
    return xf.mul_radial(acc, 1).scale(Fraction(1, factorial(m)))


def _check_eq51(m: int, k: int, n: int) -> tuple:
    lhs = xf.contract_y(xf.build_A(m, k, n))
    if k == 0:
        rhs = xf.zero_field(n, 2 * m - 1)
    else:
        rhs = xf.build_A(m - 1, k - 1, n).scale(-k)
    return lhs, rhs


def _check_eq52(m: int, k: int, n: int) -> tuple:
    lhs = xf.divergence(xf.build_A(m, k, n))
    rhs = xf.build_A(m, k + 1, n).scale((2 * m - 2 * k - 1) * (n + 2 * m - 2 * k - 3))
    return lhs, rhs


def _check_eq55(m: int, k: int, n: int) -> tuple:
    lhs = _apply_n(xf.divergence, xf.build_A(m, 0, n), k)
    ratio = Fraction(
        double_factorial(2 * m - 1) * double_factorial(n + 2 * m - 3),
        double_factorial(2 * m - 2 * k - 1) * double_factorial(n + 2 * m - 2 * k - 3),
    )
    rhs = xf.build_A(m, k, n).scale(ratio)
    return lhs, rhs


def _check_eq57(m: int, k: int, l: int, n: int, seed: int) -> tuple:
    g = xf.random_poly_field(n, m, seed)
    lhs = xf.field_contract(
        _apply_n(xf.divergence, xf.build_A(m, 0, n), k), _apply_n(xf.inner_d, g, l)
    )
    rhs = xf.zero_field(n, m - k - l)
    for p in range(k + 1):
        term = _apply_n(xf.divergence, _F_from_g(m, k + l - p, g), p)
        rhs = rhs + term.scale(Fraction((-1) ** (k + p)) * comb(k, p))
    return lhs, rhs


def _check_prop52(m: int, k: int, n: int, seed: int) -> tuple:
    g = xf.random_poly_field(n, m, seed)
    F = [_F_from_g(m, p, g) for p in range(k + 1)]
    lhs = xf.field_contract(xf.build_A(m, k, n), g)
    rhs = _H_from_F(m, k, n, F)
    return lhs, rhs


def _check_eq62(m: int, k: int, n: int, seed: int, axis: int) -> tuple:
    g = xf.random_poly_field(n, m + 1, seed)
    gt = xf.RadialPolyField(
        n, m, tuple(dict(g.get(idx + (axis,))) for idx in xf.canonical_indices(n, m))
    )
    lhs = xf.field_contract(xf.build_A(m, k, n), gt)
    rhs = xf.field_slice(xf.field_contract(xf.build_A(m + 1, k, n), g), axis).scale(
        Fraction(1, 2 * m - 2 * k + 1)
    )
    yterm = xf.field_contract(xf.build_A(m + 1, k + 1, n), g)
    rhs = rhs - xf.RadialPolyField(
        n, m - k, tuple(xf._comp_mul_mono(c, axis) for c in yterm.comps)
    )
    if k < m:
        ev = tuple(Fraction(1 if i == axis else 0) for i in range(n))
        dterm = xf.mul_const_vector(xf.field_contract(xf.build_A(m, k, n), g), ev)
        rhs = rhs - dterm.scale(m - k)
    return lhs, rhs.scale(Fraction(1, m + 1))


def _check_eq68(m: int, n: int, seed: int, beta=beta_closed) -> tuple:
    g = xf.random_poly_field(n, m, seed)
    lhs = xf.field_contract(xf.build_A(m, 0, n), g)
    rhs = xf.mul_radial(g, -1).scale(factorial(m) * double_factorial(2 * m - 1))
    for k in range(1, m + 1):
        Ak_g = xf.field_contract(xf.build_A(m, k, n), g)
        for p in range(min(k, m - k) + 1):
            b = beta(m, k, p)
            if not b:
                continue
            term = _apply_n(xf.contract_y, Ak_g, p)
            term = _apply_n(xf.delta_mul_field, term, p)
            term = _apply_n(xf.mul_y, term, k - p)
            rhs = rhs + term.scale(b)
    return lhs, rhs


def _check_eq60(m: int, n: int, seed: int) -> tuple:
    g = xf.random_poly_field(n, m, seed)
    H = [xf.field_contract(xf.build_A(m, k, n), g) for k in range(m + 1)]
    return _reconstruct_from_H(m, H), g


def _check_eq71(k: int, l: int, n: int, rank: int, seed: int) -> tuple:
    g = xf.random_poly_field(n, rank, seed)
    lhs = _apply_n(xf.inner_d, _apply_n(xf.mul_y, g, l), k)
    rhs = xf.zero_field(n, rank + k + l)
    for p in range(max(0, k - l), k + 1):
        coef = comb(k, p) * Fraction(factorial(l), factorial(p - k + l))
        term = _apply_n(xf.inner_d, g, p)
        term = _apply_n(xf.delta_mul_field, term, k - p)
        term = _apply_n(xf.mul_y, term, p - k + l)
        rhs = rhs + term.scale(coef)
    return lhs, rhs


def _check_eq72(n: int, rank: int, seed: int) -> tuple:
    g = xf.random_poly_field(n, rank, seed)
    lhs = xf.inner_d(xf.mul_y(g)) - xf.mul_y(xf.inner_d(g))
    return lhs, xf.delta_mul_field(g)


def _check_eq75(k: int, l: int, n: int, rank: int, seed: int) -> tuple:
    g = xf.random_poly_field(n, rank, seed)
    lhs = _apply_n(xf.contract_y, _apply_n(xf.divergence, g, k), l)
    rhs = xf.zero_field(n, rank - k - l)
    for p in range(max(0, k - l), k + 1):
        coef = Fraction((-1) ** (k + p)) * comb(k, p) * Fraction(
            factorial(l), factorial(p - k + l)
        )
        term = _apply_n(xf.contract_y, g, p - k + l)
        term = _apply_n(xf.divergence, term, p)
        term = _apply_n(xf.trace_field, term, k - p)
        rhs = rhs + term.scale(coef)
    return lhs, rhs


def _check_eq85(m: int, n: int, seed: int) -> tuple:
    g = xf.random_poly_field(n, m, seed)
    lhs = g.scale(double_factorial(2 * m - 1) * double_factorial(n + 2 * m - 3))
    rhs = xf.zero_field(n, m)
    for k in range(m + 1):
        Fk = _F_from_g(m, k, g)
        for p in range(k, m + 1):
            for q in range(min(p, m - p, p - k) + 1):
                coef = Fraction(
                    (-1) ** (k + p) * double_factorial(n + 2 * m - 2 * p - 3),
                    2**q
                    * factorial(k)
                    * factorial(q)
                    * factorial(m - p - q)
                    * factorial(p - k - q),
                )
                term = _apply_n(xf.divergence, Fk, p - k - q)
                term = _apply_n(xf.trace_field, term, q)
                term = _apply_n(xf.delta_mul_field, term, q)
                term = _apply_n(xf.mul_y, term, p - q)
                rhs = rhs + term.scale(coef)
    return lhs, xf.mul_radial(rhs, 1)


def _check_exact_pipeline(m: int, n: int, seed: int) -> tuple:
    """Full exact route: derivative data -> algebraic data -> reconstruction."""
    g = xf.random_poly_field(n, m, seed)
    F = [_F_from_g(m, k, g) for k in range(m + 1)]
    H = [_H_from_F(m, k, n, F) for k in range(m + 1)]
    return _reconstruct_from_H(m, H), g


def _check_lemma41(a: Fraction, b: Fraction, k: int):
    a, b = Fraction(a), Fraction(b)
    lhs = sum(
        Fraction((-1) ** l) * comb(k, l) * (a * a + b) ** (2 * k - l) / a ** (2 * k - 2 * l)
        for l in range(k + 1)
    )
    rhs = sum(comb(k, l) * b ** (k + l) / a ** (2 * l) for l in range(k + 1))
    return lhs, rhs


def _check_euler(m: int, k: int, n: int) -> tuple:
    """j_y d h = deg(h) * h for the homogeneous field h = d^(2m-k-1)|y|^(2m-2k-1)."""
    h = xf.radial_power(n, 2 * m - 2 * k - 1)
    for _ in range(2 * m - k - 1):
        h = xf.inner_d(h)
    deg = (2 * m - 2 * k - 1) - (2 * m - k - 1)
    return xf.contract_y(xf.inner_d(h)), h.scale(deg)


_FIELD_CHECKS = {
    "eq5.1": _check_eq51,
    "eq5.2": _check_eq52,
    "eq5.5": _check_eq55,
    "eq5.7": _check_eq57,
    "prop5.2": _check_prop52,
    "eq6.2": _check_eq62,
    "eq6.8": _check_eq68,
    "eq6.0": _check_eq60,
    "eq7.1": _check_eq71,
    "eq7.2": _check_eq72,
    "eq7.5": _check_eq75,
    "eq8.5": _check_eq85,
    "exact_pipeline": _check_exact_pipeline,
    "euler": _check_euler,
}

IDENTITY_NAMES = tuple(_FIELD_CHECKS) + ("lemma4.1",)


def check_identity(name: str, params: dict) -> dict:
    """Run one identity check; returns a JSON-serializable report."""
    t0 = time.perf_counter()
    if name == "lemma4.1":
        lhs, rhs = _check_lemma41(**params)
        passed = lhs == rhs
        lhs_terms = rhs_terms = 1
    elif name in _FIELD_CHECKS:
        lhs, rhs = _FIELD_CHECKS[name](**params)
        passed = xf.canonical_eq(lhs, rhs)
        lhs_terms = lhs.term_count()
        rhs_terms = rhs.term_count()
    else:
        raise KeyError(f"unknown identity {name!r}")
    elapsed = (time.perf_counter() - t0) * 1000.0
    return {
        "identity": name,
        "params": {k: str(v) if isinstance(v, Fraction) else v for k, v in params.items()},
        "pass": bool(passed),
        "elapsed_ms": round(elapsed, 3),
        "lhs_terms": lhs_terms,
        "rhs_terms": rhs_terms,
    }


def default_cases(max_m: int = 3, dims=(2, 3, 4), seeds=(1, 2, 3, 4, 5), suite: str = "all"):
    """Enumerate the parameter grid of the exact identity suite."""
    cases = []

    def want(name):
        return suite in ("all", name)

    ladder_max_m = min(max_m + 1, 4)  # the A-field ladder is cheap; exercised one rank higher
    for n in dims:
        for m in range(0, ladder_max_m + 1):
            for k in range(m + 1):
                if m >= 1 and want("eq5.1"):
                    cases.append(("eq5.1", {"m": m, "k": k, "n": n}))
                if k < m and want("eq5.2"):
                    cases.append(("eq5.2", {"m": m, "k": k, "n": n}))
                if want("eq5.5"):
                    cases.append(("eq5.5", {"m": m, "k": k, "n": n}))
    for n in dims:
        for seed in seeds:
            for m in range(0, max_m + 1):
                if want("eq6.8"):
                    cases.append(("eq6.8", {"m": m, "n": n, "seed": seed}))
                if want("eq6.0"):
                    cases.append(("eq6.0", {"m": m, "n": n, "seed": seed}))
                if want("eq8.5"):
                    cases.append(("eq8.5", {"m": m, "n": n, "seed": seed}))
                if want("exact_pipeline"):
                    cases.append(("exact_pipeline", {"m": m, "n": n, "seed": seed}))
                for k in range(m + 1):
                    if want("prop5.2"):
                        cases.append(("prop5.2", {"m": m, "k": k, "n": n, "seed": seed}))
                    if want("eq6.2"):
                        cases.append(
                            ("eq6.2", {"m": m, "k": k, "n": n, "seed": seed, "axis": seed % n})
                        )
                    for l in range(m - k + 1):
                        if want("eq5.7"):
                            cases.append(("eq5.7", {"m": m, "k": k, "l": l, "n": n, "seed": seed}))
            if want("eq7.2"):
                cases.append(("eq7.2", {"n": n, "rank": 2, "seed": seed}))
            for k in range(0, 5):
                for l in range(0, 5):
                    if want("eq7.1"):
                        cases.append(("eq7.1", {"k": k, "l": l, "n": n, "rank": 1, "seed": seed}))
                    if want("eq7.5"):
                        cases.append(
                            ("eq7.5", {"k": k, "l": l, "n": n, "rank": k + l + 1, "seed": seed})
                        )
    for seed in seeds:
        for k in range(0, 5):
            cases.append(
                (
                    "lemma4.1",
                    {"a": Fraction(2 * seed + 1, 2), "b": Fraction(-seed, 4), "k": k},
                )
            )
    return [c for c in cases if suite == "all" or c[0] == suite]


def run_suite(cases) -> list:
    return [check_identity(name, params) for name, params in cases]
