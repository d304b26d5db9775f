"""Exact calculus on tensor fields with components sum_j c_j * y^alpha_j * |y|^s_j.

Coefficients are rational, monomial exponents and the |y| power are integers
(the power may be negative), so the ring is closed under differentiation,
symmetrized gradient, divergence, multiplication and contraction by y, and
contraction between fields.  Everything here is exact: no floats, no
probabilistic equality.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

from .symtensor import canonical_indices, multiplicity, sym_dim

__all__ = [
    "RadialPolyField",
    "zero_field",
    "radial_power",
    "random_poly_field",
    "partial",
    "inner_d",
    "divergence",
    "contract_y",
    "mul_y",
    "mul_const_vector",
    "delta_mul_field",
    "trace_field",
    "field_contract",
    "field_slice",
    "mul_radial",
    "build_A",
    "canonical_eq",
    "is_zero_field",
    "evaluate_on_grid",
]

# A component is a dict {(mono, rpow): Fraction}; mono is a tuple of n
# non-negative exponents, rpow the integer power of |y|.


def _acc(comp: dict, key, coef: Fraction):
    cur = comp.get(key)
    if cur is None:
        comp[key] = coef
    else:
        cur = cur + coef
        if cur:
            comp[key] = cur
        else:
            del comp[key]


def _comp_add(a: dict, b: dict, scale: Fraction = Fraction(1)) -> dict:
    out = dict(a)
    for key, coef in b.items():
        _acc(out, key, scale * coef)
    return out


def _comp_scale(a: dict, c: Fraction) -> dict:
    if not c:
        return {}
    return {key: c * coef for key, coef in a.items()}


def _comp_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (ma, sa), ca in a.items():
        for (mb, sb), cb in b.items():
            mono = tuple(x + y for x, y in zip(ma, mb))
            _acc(out, (mono, sa + sb), ca * cb)
    return out


def _comp_partial(a: dict, axis: int) -> dict:
    """d/dy_axis of c y^alpha |y|^s = c alpha_i y^(alpha-e_i) |y|^s + c s y^(alpha+e_i) |y|^(s-2)."""
    out: dict = {}
    for (mono, s), coef in a.items():
        if mono[axis]:
            down = list(mono)
            down[axis] -= 1
            _acc(out, (tuple(down), s), coef * mono[axis])
        if s:
            up = list(mono)
            up[axis] += 1
            _acc(out, (tuple(up), s - 2), coef * s)
    return out


def _comp_mul_mono(a: dict, axis: int) -> dict:
    out: dict = {}
    for (mono, s), coef in a.items():
        up = list(mono)
        up[axis] += 1
        out[(tuple(up), s)] = coef
    return out


@dataclass(frozen=True)
class RadialPolyField:
    """Rank-m symmetric tensor field on R^n \\ {0}, one term dict per canonical index."""

    n: int
    m: int
    comps: tuple  # tuple of term dicts aligned with canonical_indices(n, m)

    def __post_init__(self):
        if len(self.comps) != sym_dim(self.n, self.m):
            raise ValueError("component count does not match rank/dimension")

    def get(self, idx) -> dict:
        key = tuple(sorted(idx))
        return self.comps[_pos(self.n, self.m)[key]]

    def __add__(self, other: "RadialPolyField") -> "RadialPolyField":
        _check(self, other)
        return RadialPolyField(
            self.n, self.m, tuple(_comp_add(a, b) for a, b in zip(self.comps, other.comps))
        )

    def __sub__(self, other: "RadialPolyField") -> "RadialPolyField":
        _check(self, other)
        return RadialPolyField(
            self.n,
            self.m,
            tuple(_comp_add(a, b, Fraction(-1)) for a, b in zip(self.comps, other.comps)),
        )

    def scale(self, c) -> "RadialPolyField":
        c = Fraction(c)
        return RadialPolyField(self.n, self.m, tuple(_comp_scale(a, c) for a in self.comps))

    def term_count(self) -> int:
        return sum(len(c) for c in self.comps)


@lru_cache(maxsize=None)
def _pos(n: int, m: int) -> dict:
    return {idx: i for i, idx in enumerate(canonical_indices(n, m))}


def _check(f: RadialPolyField, g: RadialPolyField):
    if f.n != g.n or f.m != g.m:
        raise ValueError(f"field space mismatch: ({f.n},{f.m}) vs ({g.n},{g.m})")


def zero_field(n: int, m: int) -> RadialPolyField:
    return RadialPolyField(n, m, tuple({} for _ in range(sym_dim(n, m))))


def radial_power(n: int, s: int) -> RadialPolyField:
    """Scalar field |y|^s."""
    return RadialPolyField(n, 0, ({((0,) * n, s): Fraction(1)},))


def random_poly_field(
    n: int, m: int, seed: int, degree: int = 2, max_num: int = 8, max_den: int = 16
) -> RadialPolyField:
    """Deterministic random tensor field with rational polynomial components."""
    rng = random.Random(f"{seed}-{n}-{m}-{degree}")
    monos = [
        mono
        for mono in _monomials_up_to(n, degree)
    ]
    comps = []
    for _ in canonical_indices(n, m):
        comp: dict = {}
        for mono in monos:
            num = rng.randint(-max_num, max_num)
            if num:
                _acc(comp, (mono, 0), Fraction(num, rng.randint(1, max_den)))
        comps.append(comp)
    return RadialPolyField(n, m, tuple(comps))


def _monomials_up_to(n: int, degree: int):
    if n == 0:
        yield ()
        return
    for head in range(degree + 1):
        for rest in _monomials_up_to(n - 1, degree - head):
            yield (head,) + rest


def partial(f: RadialPolyField, axis: int) -> RadialPolyField:
    return RadialPolyField(f.n, f.m, tuple(_comp_partial(c, axis) for c in f.comps))


def inner_d(f: RadialPolyField) -> RadialPolyField:
    """Symmetrized gradient d, raising the rank by one."""
    r = f.m + 1
    comps = []
    for idx in canonical_indices(f.n, r):
        total: dict = {}
        for j in range(r):
            rest = idx[:j] + idx[j + 1 :]
            total = _comp_add(total, _comp_partial(f.get(rest), idx[j]))
        comps.append(_comp_scale(total, Fraction(1, r)))
    return RadialPolyField(f.n, r, tuple(comps))


def divergence(f: RadialPolyField) -> RadialPolyField:
    """Contracted derivative, lowering the rank by one."""
    if f.m < 1:
        raise ValueError("divergence needs rank >= 1")
    comps = []
    for jdx in canonical_indices(f.n, f.m - 1):
        total: dict = {}
        for i in range(f.n):
            total = _comp_add(total, _comp_partial(f.get(jdx + (i,)), i))
        comps.append(total)
    return RadialPolyField(f.n, f.m - 1, tuple(comps))


def contract_y(f: RadialPolyField) -> RadialPolyField:
    """j_y f: contraction with the position vector."""
    if f.m < 1:
        raise ValueError("contract_y needs rank >= 1")
    comps = []
    for jdx in canonical_indices(f.n, f.m - 1):
        total: dict = {}
        for i in range(f.n):
            total = _comp_add(total, _comp_mul_mono(f.get(jdx + (i,)), i))
        comps.append(total)
    return RadialPolyField(f.n, f.m - 1, tuple(comps))


def mul_y(f: RadialPolyField) -> RadialPolyField:
    """i_y f: symmetric multiplication by the position vector."""
    r = f.m + 1
    comps = []
    for idx in canonical_indices(f.n, r):
        total: dict = {}
        for j in range(r):
            rest = idx[:j] + idx[j + 1 :]
            total = _comp_add(total, _comp_mul_mono(f.get(rest), idx[j]))
        comps.append(_comp_scale(total, Fraction(1, r)))
    return RadialPolyField(f.n, r, tuple(comps))


def mul_const_vector(f: RadialPolyField, v) -> RadialPolyField:
    """i_v f for a constant vector v with rational entries."""
    v = tuple(Fraction(x) for x in v)
    r = f.m + 1
    comps = []
    for idx in canonical_indices(f.n, r):
        total: dict = {}
        for j in range(r):
            if v[idx[j]]:
                rest = idx[:j] + idx[j + 1 :]
                total = _comp_add(total, f.get(rest), v[idx[j]])
        comps.append(_comp_scale(total, Fraction(1, r)))
    return RadialPolyField(f.n, r, tuple(comps))


def delta_mul_field(f: RadialPolyField) -> RadialPolyField:
    """i f: symmetric multiplication by the Kronecker tensor."""
    r = f.m + 2
    npairs = comb(r, 2)
    comps = []
    for idx in canonical_indices(f.n, r):
        total: dict = {}
        for a in range(r):
            for b in range(a + 1, r):
                if idx[a] == idx[b]:
                    rest = tuple(idx[t] for t in range(r) if t != a and t != b)
                    total = _comp_add(total, f.get(rest))
        comps.append(_comp_scale(total, Fraction(1, npairs)))
    return RadialPolyField(f.n, r, tuple(comps))


def trace_field(f: RadialPolyField) -> RadialPolyField:
    """j f: contraction with the Kronecker tensor."""
    if f.m < 2:
        raise ValueError("trace needs rank >= 2")
    comps = []
    for jdx in canonical_indices(f.n, f.m - 2):
        total: dict = {}
        for i in range(f.n):
            total = _comp_add(total, f.get(jdx + (i, i)))
        comps.append(total)
    return RadialPolyField(f.n, f.m - 2, tuple(comps))


def field_contract(u: RadialPolyField, v: RadialPolyField) -> RadialPolyField:
    """u/v = j_v u: full-index-set contraction of two fields (term products)."""
    if u.n != v.n:
        raise ValueError("ambient dimension mismatch")
    if u.m < v.m:
        raise ValueError(f"cannot contract rank {u.m} against rank {v.m}")
    k = u.m - v.m
    weights = [(kidx, multiplicity(kidx)) for kidx in canonical_indices(u.n, v.m)]
    comps = []
    for jdx in canonical_indices(u.n, k):
        total: dict = {}
        for kidx, w in weights:
            vc = v.get(kidx)
            if not vc:
                continue
            prod = _comp_mul(u.get(jdx + kidx), vc)
            total = _comp_add(total, prod, Fraction(w))
        comps.append(total)
    return RadialPolyField(u.n, k, tuple(comps))


def field_slice(f: RadialPolyField, axis: int) -> RadialPolyField:
    """Fix the last index of f to a coordinate axis, lowering the rank by one."""
    if f.m < 1:
        raise ValueError("slice needs rank >= 1")
    comps = [dict(f.get(jdx + (axis,))) for jdx in canonical_indices(f.n, f.m - 1)]
    return RadialPolyField(f.n, f.m - 1, tuple(comps))


def mul_radial(f: RadialPolyField, s: int) -> RadialPolyField:
    """Multiply every component by |y|^s."""
    comps = [{(mono, rp + s): c for (mono, rp), c in comp.items()} for comp in f.comps]
    return RadialPolyField(f.n, f.m, tuple(comps))


@lru_cache(maxsize=None)
def build_A(m: int, k: int, n: int) -> RadialPolyField:
    """Auxiliary field: the (2m-k)-fold symmetrized gradient of |y|^(2m-2k-1)."""
    if not (0 <= k <= m):
        raise ValueError(f"need 0 <= k <= m, got m={m}, k={k}")
    f = radial_power(n, 2 * m - 2 * k - 1)
    for _ in range(2 * m - k):
        f = inner_d(f)
    return f


# ---------------------------------------------------------------------------
# Structural equality: P(y) + |y| Q(y) canonical split.

@lru_cache(maxsize=None)
def _sum_sq_power(n: int, t: int) -> tuple:
    """(y_1^2 + ... + y_n^2)^t as a tuple of (mono, integer coefficient)."""
    if t == 0:
        return (((0,) * n, 1),)
    prev = dict(_sum_sq_power(n, t - 1))
    out: dict = {}
    for mono, c in prev.items():
        for i in range(n):
            up = list(mono)
            up[i] += 2
            key = tuple(up)
            out[key] = out.get(key, 0) + c
    return tuple(out.items())


def _comp_is_zero(comp: dict, n: int) -> bool:
    """True iff the component vanishes identically on R^n \\ {0}.

    Shift radial powers non-negative, fold even powers of |y| into the
    polynomial part, split as P + |y| Q with polynomial P, Q; the component
    is zero iff both polynomials have all-zero coefficients.
    """
    if not comp:
        return True
    smin = min(rp for (_, rp) in comp)
    shift = -smin if smin < 0 else 0
    # make the shift even so parity of rpow is preserved
    if shift % 2:
        shift += 1
    poly_even: dict = {}
    poly_odd: dict = {}
    for (mono, rp), coef in comp.items():
        rp += shift
        target = poly_even if rp % 2 == 0 else poly_odd
        t = rp // 2
        for sq_mono, sq_c in _sum_sq_power(n, t):
            key = tuple(a + b for a, b in zip(mono, sq_mono))
            cur = target.get(key, Fraction(0)) + coef * sq_c
            if cur:
                target[key] = cur
            elif key in target:
                del target[key]
    return not poly_even and not poly_odd


def is_zero_field(f: RadialPolyField) -> bool:
    return all(_comp_is_zero(c, f.n) for c in f.comps)


def canonical_eq(f: RadialPolyField, g: RadialPolyField) -> bool:
    """Exact structural equality of two fields as functions on R^n \\ {0}."""
    _check(f, g)
    return is_zero_field(f - g)


def evaluate_on_grid(f: RadialPolyField, coords) -> list:
    """Evaluate each canonical component at float points.

    ``coords`` is a sequence of n broadcast-compatible numpy arrays.  Points
    at the origin evaluate to 0 whenever a negative |y| power is present
    (the fields live on R^n \\ {0}).
    """
    import numpy as np

    rsq = sum(c * c for c in coords)
    r = np.sqrt(rsq)
    singular = r == 0
    rsafe = np.where(singular, 1.0, r)
    out = []
    for comp in f.comps:
        acc = np.zeros(rsafe.shape)
        for (mono, rp), coef in comp.items():
            term = float(coef) * rsafe**rp
            for axis, e in enumerate(mono):
                if e:
                    term = term * coords[axis] ** e
            acc = acc + term
        acc = np.where(singular, 0.0, acc)
        out.append(acc)
    return out
