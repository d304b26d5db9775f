"""Shared fixtures and strategies for the test suite."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as hst

from momray.symtensor import SymTensor, sym_dim


def exact_scalars():
    return hst.fractions(
        min_value=Fraction(-8), max_value=Fraction(8), max_denominator=8
    )


def exact_tensors(n: int, m: int):
    dim = sym_dim(n, m)
    return hst.tuples(*([exact_scalars()] * dim)).map(
        lambda comps: SymTensor(n, m, comps)
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
