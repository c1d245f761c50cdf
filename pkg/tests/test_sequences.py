import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from numerics import DomainError
from sequences import (
    GeomDecay, NotAlmostGeometric, WeightedSequence, detect_geom, embedding_norm, embedding_ratio, geom_ratio,
    holder_sides, leindler_check, leindler_constant, lq_norm,
)


positive_terms = st.lists(st.sampled_from([0.25, 0.5, 1.0, 2.0, 4.0]), min_size=1, max_size=8)
exponents = st.sampled_from([0.5, 1.0, 2.0, 3.0, math.inf])


def geometric_like(factors):
    """Positive sequence with the given successive ratios."""
    return np.cumprod([1.0] + list(factors))


# ============================================================================
# NORMS AND HOELDER
# ============================================================================

def test_lq_norm():
    s = WeightedSequence((3.0, 4.0), (1.0, 1.0))
    assert lq_norm(s, 2.0) == 5.0
    assert lq_norm(WeightedSequence((1.0, 2.0), (3.0, 1.0)), math.inf) == 3.0
    assert s.stop == 1


def test_weighted_sequence_validation():
    with pytest.raises(DomainError):
        WeightedSequence((1.0,), (0.0,))
    with pytest.raises(DomainError):
        WeightedSequence((1.0, 2.0), (1.0,))


@given(a=positive_terms, b=positive_terms, q=exponents, p=exponents)
@settings(max_examples=500)
def test_discrete_hoelder(a, b, q, p):
    """Property: ||ab||_q <= ||a||_r ||b||_p."""
    n = min(len(a), len(b))
    left, right = holder_sides(a[:n], b[:n], q, p)
    assert left <= right * (1.0 + 1e-12)


# ============================================================================
# EMBEDDING NORMS
# ============================================================================

def test_embedding_examples():
    value, extremal = embedding_norm([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], 2.0, 2.0)
    assert value == 1.0
    value, extremal = embedding_norm([1.0, 1.0], [1.0, 1.0], 1.0, 2.0)
    assert value == pytest.approx(math.sqrt(2.0))
    assert list(extremal) == [1.0, 1.0]
    value, extremal = embedding_norm([3.0, 1.0], [1.0, 1.0], 2.0, 1.0)
    assert value == 3.0
    assert list(extremal) == [1.0, 0.0]


def test_embedding_needs_positive_weights():
    with pytest.raises(DomainError):
        embedding_norm([1.0], [0.0], 1.0, 2.0)


@given(W=positive_terms, U=positive_terms, p=exponents, q=exponents)
@settings(max_examples=100)
def test_extremal_attains_the_embedding_norm(W, U, p, q):
    """Property: the returned sequence attains ||{W_k/U_k}||_rho."""
    n = min(len(W), len(U))
    value, extremal = embedding_norm(W[:n], U[:n], p, q)
    assert embedding_ratio(extremal, W[:n], U[:n], p, q) == pytest.approx(value, rel=1e-9)


@given(W=positive_terms, U=positive_terms, a=positive_terms, p=exponents, q=exponents)
@settings(max_examples=100)
def test_no_sequence_beats_the_embedding_norm(W, U, a, p, q):
    n = min(len(W), len(U), len(a))
    value, _ = embedding_norm(W[:n], U[:n], p, q)
    assert embedding_ratio(a[:n], W[:n], U[:n], p, q) <= value * (1.0 + 1e-9)


# ============================================================================
# ALMOST GEOMETRIC SEQUENCES
# ============================================================================

def test_detect_dyadic_decay():
    witness = detect_geom(2.0 ** -np.arange(8))
    assert witness == GeomDecay(1.0, 2.0, 1)


def test_detect_needs_two_steps():
    witness = detect_geom([1.0, 1.0, 0.25, 0.25, 0.0625])
    assert witness.L == 2
    assert witness.alpha == 4.0
    assert witness.K == 1.0


def test_constant_sequence_is_not_geometric():
    assert detect_geom([1.0, 1.0, 1.0]) is None
    assert geom_ratio([1.0, 1.0, 1.0], 1) == 1.0


def test_increasing_direction():
    witness = detect_geom([1.0, 2.0, 4.0], direction='increasing')
    assert witness.alpha == 2.0


@given(factors=st.lists(st.sampled_from([0.25, 0.5, 1.0, 2.0]), min_size=1, max_size=10),
       q=st.sampled_from([0.5, 1.0, 2.0]))
@settings(max_examples=100)
def test_witness_is_invariant_under_powers(factors, q):
    """Property: tau, tau^q and tau^-q (increasing) share the same L."""
    tau = geometric_like(factors)
    witness = detect_geom(tau)
    assume(witness is not None)
    assert detect_geom(tau ** q).L == witness.L
    assert detect_geom(tau ** -q, direction='increasing').L == witness.L


# ============================================================================
# LEINDLER EQUIVALENCE
# ============================================================================

def test_leindler_constant_dyadic():
    assert leindler_constant(1.0, 2.0, 1, 1.0, 'sum') == 2.0
    assert leindler_constant(2.0, 2.0, 3, math.inf, 'sup') == 4.0
    with pytest.raises(DomainError):
        leindler_constant(1.0, 2.0, 1, 1.0, 'mean')


def test_leindler_sum_attains_constant_asymptotically():
    tau = 2.0 ** -np.arange(60)
    a = np.zeros(60)
    a[0] = 1.0
    lhs, rhs = leindler_check(tau, a, 1.0, 'sum')
    assert rhs == 1.0
    assert lhs == pytest.approx(2.0, rel=1e-12)


def test_leindler_rejects_flat_weights():
    with pytest.raises(NotAlmostGeometric):
        leindler_check([1.0, 1.0], [1.0, 1.0], 1.0)


@given(factors=st.lists(st.sampled_from([0.25, 0.5, 1.0, 1.5]), min_size=1, max_size=10),
       data=st.data(),
       q=st.sampled_from([0.5, 1.0, 2.0, math.inf]),
       mode=st.sampled_from(['sum', 'sup']))
@settings(max_examples=500)
def test_leindler_bounds(factors, data, q, mode):
    """Property: rhs <= lhs <= C rhs with C from the detected witness."""
    tau = geometric_like(factors)
    witness = detect_geom(tau)
    assume(witness is not None)
    a = data.draw(st.lists(st.sampled_from([0.0, 0.5, 1.0, 3.0]), min_size=len(tau), max_size=len(tau)))
    lhs, rhs = leindler_check(tau, a, q, mode)
    C = leindler_constant(witness.K, witness.alpha, witness.L, q, mode)
    assert rhs <= lhs * (1.0 + 1e-12)
    assert lhs <= C * rhs * (1.0 + 1e-12)
