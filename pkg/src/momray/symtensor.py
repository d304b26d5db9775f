"""Symmetric tensor algebra over R^n in compressed canonical storage.

A rank-m symmetric tensor is stored as one scalar per sorted multi-index
(C(n+m-1, m) entries).  Scalars are either exact (int / Fraction) or
floating (float / complex); the two kinds never mix silently.  All values
are immutable and all operations pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Mapping

__all__ = [
    "SymTensor",
    "sym_dim",
    "canonical_indices",
    "multiplicity",
    "symmetrize",
    "densify",
    "dot",
    "sym_mul",
    "contract",
    "delta_mul",
    "trace",
    "kronecker",
    "vector",
    "vector_power",
]

EXACT = "exact"
FLOAT = "float"

_EXACT_TYPES = (int, Fraction)


def sym_dim(n: int, m: int) -> int:
    """Dimension C(n+m-1, m) of the space of rank-m symmetric tensors on R^n."""
    if n < 1 or m < 0:
        raise ValueError(f"need n >= 1, m >= 0, got n={n}, m={m}")
    return comb(n + m - 1, m)


@lru_cache(maxsize=None)
def canonical_indices(n: int, m: int) -> tuple[tuple[int, ...], ...]:
    """All sorted multi-indices of length m with entries in 0..n-1."""
    return tuple(itertools.combinations_with_replacement(range(n), m))


@lru_cache(maxsize=None)
def _index_position(n: int, m: int) -> dict[tuple[int, ...], int]:
    return {idx: pos for pos, idx in enumerate(canonical_indices(n, m))}


@lru_cache(maxsize=None)
def multiplicity(idx: tuple[int, ...]) -> int:
    """Number of distinct permutations of a multi-index."""
    count = factorial(len(idx))
    for axis in set(idx):
        count //= factorial(idx.count(axis))
    return count


def _scalar_kind(value) -> str:
    if isinstance(value, _EXACT_TYPES):
        return EXACT
    return FLOAT


def _exact_div(value, divisor: int):
    return Fraction(value) / divisor


@dataclass(frozen=True)
class SymTensor:
    """Immutable symmetric tensor; ``comps`` aligned with canonical_indices(n, m)."""

    n: int
    m: int
    comps: tuple

    def __post_init__(self):
        expected = sym_dim(self.n, self.m)
        if len(self.comps) != expected:
            raise ValueError(
                f"rank-{self.m} tensor on R^{self.n} needs {expected} components, "
                f"got {len(self.comps)}"
            )

    @property
    def kind(self) -> str:
        if not self.comps:  # unreachable: sym_dim >= 1
            return EXACT
        return _scalar_kind(self.comps[0])

    @classmethod
    def zeros(cls, n: int, m: int, kind: str = EXACT) -> "SymTensor":
        zero = Fraction(0) if kind == EXACT else 0.0
        return cls(n, m, (zero,) * sym_dim(n, m))

    @classmethod
    def from_map(
        cls, n: int, m: int, mapping: Mapping[tuple[int, ...], object], kind: str = EXACT
    ) -> "SymTensor":
        """Build from a (possibly partial) map of canonical multi-indices to values."""
        zero = Fraction(0) if kind == EXACT else 0.0
        comps = [zero] * sym_dim(n, m)
        pos = _index_position(n, m)
        for idx, value in mapping.items():
            comps[pos[tuple(sorted(idx))]] = value
        return cls(n, m, tuple(comps))

    def get(self, idx: Iterable[int]):
        """Component at an arbitrary (not necessarily sorted) multi-index."""
        key = tuple(sorted(idx))
        return self.comps[_index_position(self.n, self.m)[key]]

    def map(self, fn) -> "SymTensor":
        return SymTensor(self.n, self.m, tuple(fn(c) for c in self.comps))

    def __add__(self, other: "SymTensor") -> "SymTensor":
        _check_same_space(self, other)
        return SymTensor(self.n, self.m, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other: "SymTensor") -> "SymTensor":
        _check_same_space(self, other)
        return SymTensor(self.n, self.m, tuple(a - b for a, b in zip(self.comps, other.comps)))

    def scale(self, c) -> "SymTensor":
        return SymTensor(self.n, self.m, tuple(c * v for v in self.comps))

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.comps)


def _check_same_space(u: SymTensor, v: SymTensor):
    if u.n != v.n or u.m != v.m:
        raise ValueError(f"tensor space mismatch: (n={u.n}, m={u.m}) vs (n={v.n}, m={v.m})")
    _check_same_kind(u, v)


def _check_same_kind(u: SymTensor, v: SymTensor):
    if u.kind != v.kind:
        raise TypeError(f"scalar kind mismatch: {u.kind} vs {v.kind}")


def symmetrize(dense: Mapping[tuple[int, ...], object], n: int, m: int) -> SymTensor:
    """Full symmetrization of a dense rank-m tensor given as {full index tuple: value}.

    The component at canonical index I is the average of ``dense`` over all
    distinct rearrangements of I.
    """
    comps = []
    exact = all(isinstance(v, _EXACT_TYPES) for v in dense.values()) if dense else True
    for idx in canonical_indices(n, m):
        perms = set(itertools.permutations(idx))
        total = sum(dense.get(p, 0) for p in perms)
        if exact:
            comps.append(_exact_div(total, len(perms)))
        else:
            comps.append(total / len(perms))
    return SymTensor(n, m, tuple(comps))


def densify(u: SymTensor) -> dict[tuple[int, ...], object]:
    """Expand to the full n^m index set (brute-force oracle helper)."""
    out = {}
    for idx in itertools.product(range(u.n), repeat=u.m):
        out[idx] = u.get(idx)
    return out


def dot(u: SymTensor, v: SymTensor):
    """Full-index-set inner product <u, v> with conjugation on v."""
    _check_same_space(u, v)
    total = 0
    for idx, a, b in zip(canonical_indices(u.n, u.m), u.comps, v.comps):
        total += multiplicity(idx) * a * b.conjugate()
    return total


def sym_mul(u: SymTensor, v: SymTensor) -> SymTensor:
    """Symmetric product uv = sigma(u (x) v); commutative and associative."""
    if u.n != v.n:
        raise ValueError(f"ambient dimension mismatch: {u.n} vs {v.n}")
    _check_same_kind(u, v)
    r = u.m + v.m
    nsplit = comb(r, u.m)
    exact = u.kind == EXACT
    comps = []
    splits = tuple(itertools.combinations(range(r), u.m))
    for idx in canonical_indices(u.n, r):
        total = 0
        for sel in splits:
            rest = tuple(idx[i] for i in range(r) if i not in sel)
            total += u.get(idx[i] for i in sel) * v.get(rest)
        comps.append(_exact_div(total, nsplit) if exact else total / nsplit)
    return SymTensor(u.n, r, tuple(comps))


def contract(u: SymTensor, v: SymTensor) -> SymTensor:
    """Contraction u/v = j_v u over the full index set; adjoint of sym_mul(v, .)."""
    if u.n != v.n:
        raise ValueError(f"ambient dimension mismatch: {u.n} vs {v.n}")
    _check_same_kind(u, v)
    if u.m < v.m:
        raise ValueError(f"cannot contract rank {u.m} against rank {v.m}")
    k = u.m - v.m
    weights = [(kidx, multiplicity(kidx)) for kidx in canonical_indices(u.n, v.m)]
    comps = []
    for jdx in canonical_indices(u.n, k):
        total = 0
        for kidx, w in weights:
            total += w * u.get(jdx + kidx) * v.get(kidx)
        comps.append(total)
    return SymTensor(u.n, k, tuple(comps))


def kronecker(n: int, kind: str = EXACT) -> SymTensor:
    one = Fraction(1) if kind == EXACT else 1.0
    return SymTensor.from_map(n, 2, {(i, i): one for i in range(n)}, kind=kind)


def delta_mul(u: SymTensor) -> SymTensor:
    """i u = symmetric multiplication by the Kronecker tensor."""
    return sym_mul(kronecker(u.n, u.kind), u)


def trace(u: SymTensor) -> SymTensor:
    """j u = contraction with the Kronecker tensor (lowers rank by 2)."""
    if u.m < 2:
        raise ValueError(f"trace needs rank >= 2, got {u.m}")
    comps = []
    for jdx in canonical_indices(u.n, u.m - 2):
        comps.append(sum(u.get(jdx + (i, i)) for i in range(u.n)))
    return SymTensor(u.n, u.m - 2, tuple(comps))


def vector(vals) -> SymTensor:
    vals = tuple(vals)
    return SymTensor(len(vals), 1, vals)


def vector_power(v: SymTensor, k: int) -> SymTensor:
    """Symmetric power v^k of a rank-1 tensor: components are plain monomials."""
    if v.m != 1:
        raise ValueError("vector_power expects a rank-1 tensor")
    comps = []
    for idx in canonical_indices(v.n, k):
        prod = Fraction(1) if v.kind == EXACT else 1.0
        for i in idx:
            prod = prod * v.comps[i]
        comps.append(prod)
    return SymTensor(v.n, k, tuple(comps))
