import math

import numpy as np
import pytest
from hypothesis import assume, given, seed, settings
from hypothesis import strategies as st

from algorithms.novikov import (
    default_group, energy_valuation, equal_above, from_json, is_homogeneous, leading_term,
    make_element, monomial, novikov_selftest, nv_add, nv_component, nv_invert, nv_mul, one,
    random_homogeneous_element, zero
)
from models.data_models import GammaGroup
from models.exceptions import (
    EnergyDegeneracyError, GroupMismatchError, NovikovZeroDivisionError, ResourceLimitError
)

GROUP = default_group()

exponents = st.tuples(st.integers(-3, 3), st.integers(-3, 3))
elements = st.lists(exponents, min_size=1, max_size=4, unique=True).map(lambda terms: make_element(GROUP, terms))


def test_repeated_terms_cancel():
    a = make_element(GROUP, [(1, 0), (0, 1), (1, 0)])
    assert a.terms == frozenset({(0, 1)})
    assert nv_add(a, a).is_zero


def test_leading_term_and_valuation():
    a = make_element(GROUP, [(1, 0), (0, 1), (-2, 0)])
    assert leading_term(a) == (0, 1)
    assert energy_valuation(a) == pytest.approx(math.sqrt(2.0))


def test_leading_term_errors():
    with pytest.raises(NovikovZeroDivisionError):
        leading_term(zero(GROUP))
    with pytest.raises(NovikovZeroDivisionError):
        nv_invert(zero(GROUP))
    flat = GammaGroup(degree_hom=(0, 0), energy_hom=(1.0, 1.0))
    with pytest.raises(EnergyDegeneracyError):
        leading_term(make_element(flat, [(1, 0), (0, 1)]))


def test_groups_must_match():
    other = GammaGroup(degree_hom=(2, 4), energy_hom=(1.0, math.sqrt(3.0)))
    with pytest.raises(GroupMismatchError):
        nv_mul(one(GROUP), one(other))


def test_exponent_bound():
    with pytest.raises(ResourceLimitError):
        make_element(GROUP, [(10 ** 6 + 1, 0)])


def test_monomial_inverse_is_exact():
    g = monomial(GROUP, (2, -1))
    inverse = nv_invert(g)
    assert inverse.terms == frozenset({(-2, 1)})
    assert nv_mul(g, inverse).terms == frozenset({(0, 0)})


def test_inverse_of_one_plus_lower_term():
    a = make_element(GROUP, [(0, 0), (-1, 0)])
    inverse = nv_invert(a, cutoff=-4.5)
    assert inverse.terms == frozenset({(0, 0), (-1, 0), (-2, 0), (-3, 0), (-4, 0)})
    product = nv_mul(a, inverse)
    assert equal_above(product, one(GROUP), product.cutoff)


@seed(1)
@settings(max_examples=60, deadline=None)
@given(elements)
def test_inverse_round_trip(a):
    assume(not a.is_zero)
    try:
        valuation = energy_valuation(a)
    except EnergyDegeneracyError:
        assume(False)
    product = nv_mul(a, nv_invert(a, cutoff=-valuation - 4.0))
    assert product.cutoff == pytest.approx(-4.0)
    assert equal_above(product, one(GROUP), product.cutoff)


@seed(2)
@settings(max_examples=40, deadline=None)
@given(elements, elements, elements)
def test_ring_axioms(a, b, c):
    assert nv_mul(a, b) == nv_mul(b, a)
    assert nv_mul(nv_mul(a, b), c) == nv_mul(a, nv_mul(b, c))
    assert nv_mul(a, nv_add(b, c)) == nv_add(nv_mul(a, b), nv_mul(a, c))
    assert nv_add(a, zero(GROUP)) == a


@seed(3)
@settings(max_examples=50, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(0, 2 ** 16))
def test_grading_is_additive(j, k, entropy):
    rng = np.random.default_rng(entropy)
    a = random_homogeneous_element(GROUP, rng, 2 * j)
    b = random_homogeneous_element(GROUP, rng, 2 * k)
    assert is_homogeneous(a) and is_homogeneous(b)
    assert set(nv_mul(a, b).degrees()) <= {2 * (j + k)}


def test_homogeneous_components():
    a = make_element(GROUP, [(1, 0), (0, 1), (2, 0)])
    assert nv_component(a, 4).terms == frozenset({(0, 1), (2, 0)})
    assert nv_component(a, 2).terms == frozenset({(1, 0)})
    assert nv_component(a, 6).is_zero


def test_json_round_trip():
    a = nv_invert(make_element(GROUP, [(0, 0), (0, -1)]), cutoff=-3.0)
    restored = from_json(GROUP, a.to_json())
    assert restored == a


def test_selftest_passes():
    report = novikov_selftest(GROUP, seed=1, samples=100)
    assert report["passed"], report
    assert report["samples"] == 100
