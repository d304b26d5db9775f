"""Exact symmetric-tensor algebra: storage, products, contractions, adjoints."""

from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import exact_scalars, exact_tensors
from momray.symtensor import (
    SymTensor,
    canonical_indices,
    contract,
    delta_mul,
    densify,
    dot,
    kronecker,
    multiplicity,
    sym_dim,
    sym_mul,
    symmetrize,
    trace,
    vector,
    vector_power,
)


def test_sym_dim_values():
    assert sym_dim(2, 0) == 1
    assert sym_dim(2, 2) == 3
    assert sym_dim(3, 2) == 6
    assert sym_dim(3, 4) == 15


def test_multiplicities_cover_full_index_set():
    for n in (2, 3, 4):
        for m in range(5):
            assert sum(multiplicity(i) for i in canonical_indices(n, m)) == n**m


def test_canonical_indices_sorted_unique():
    idxs = canonical_indices(3, 3)
    assert all(tuple(sorted(i)) == i for i in idxs)
    assert len(set(idxs)) == len(idxs) == sym_dim(3, 3)


@given(exact_tensors(2, 2))
def test_symmetrize_densify_round_trip(u):
    assert symmetrize(densify(u), u.n, u.m) == u


@given(exact_tensors(2, 1), exact_tensors(2, 2))
def test_sym_mul_commutative(u, v):
    assert sym_mul(u, v) == sym_mul(v, u)


@settings(max_examples=25)
@given(exact_tensors(2, 1), exact_tensors(2, 1), exact_tensors(2, 2))
def test_sym_mul_associative(u, v, w):
    assert sym_mul(sym_mul(u, v), w) == sym_mul(u, sym_mul(v, w))


@given(exact_tensors(3, 1), exact_tensors(3, 2), exact_tensors(3, 3))
def test_mul_contract_adjoint_pair(u, a, b):
    # <u a, b> = <a, b/u> over the full index set
    assert dot(sym_mul(u, a), b) == dot(a, contract(b, u))


@given(exact_tensors(2, 1), exact_tensors(2, 3))
def test_delta_trace_adjoint_pair(a, b):
    # <i a, b> = <a, j b>: Kronecker multiplication against trace
    assert dot(delta_mul(a), b) == dot(a, trace(b))


@given(exact_tensors(3, 3), exact_tensors(3, 1), exact_tensors(3, 1))
def test_contractions_commute(a, u, v):
    assert contract(contract(a, u), v) == contract(contract(a, v), u)


def test_trace_of_kronecker_is_dimension():
    for n in (2, 3, 4):
        assert trace(kronecker(n)).comps == (Fraction(n),)


@given(exact_scalars(), exact_scalars(), exact_scalars(), exact_scalars())
def test_vector_power_inner_product(a, b, c, d):
    # <x^2, y^2> = <x, y>^2 for rank-1 x, y
    x, y = vector((a, b)), vector((c, d))
    assert dot(vector_power(x, 2), vector_power(y, 2)) == dot(x, y) ** 2


def test_kind_mixing_rejected():
    u = vector((Fraction(1), Fraction(2)))
    v = vector((1.0, 2.0))
    with pytest.raises(TypeError):
        dot(u, v)


def test_symmetrize_averages_asymmetric_input():
    dense = {(0, 1): Fraction(2), (1, 0): Fraction(0)}
    u = symmetrize(dense, 2, 2)
    assert u.get((0, 1)) == Fraction(1)


def test_get_unsorted_index():
    u = SymTensor.from_map(2, 2, {(0, 1): Fraction(5)})
    assert u.get((1, 0)) == Fraction(5)
