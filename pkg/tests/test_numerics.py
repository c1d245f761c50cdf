import itertools
import math

import pytest

from numerics import (
    DomainError, Enclosure, as_exponent, conjugate, encode_ext, ext_div, ext_mul, ext_pow, ext_root, holder_rho,
    lp_sum,
)


def test_conventions():
    assert ext_div(0.0, 0.0) == 0.0
    assert ext_div(1.0, 0.0) == math.inf
    assert ext_div(1.0, math.inf) == 0.0
    assert ext_mul(0.0, math.inf) == 0.0
    assert ext_pow(0.0, -1.0) == math.inf
    assert ext_pow(math.inf, -2.0) == 0.0
    assert ext_root(3.0, math.inf) == 1.0


GRID = (0.0, 0.25, 1.0, 3.0, math.inf)


def test_ext_mul_on_a_grid():
    """Commutative, associative and monotone on finite values and inf."""
    for a, b in itertools.product(GRID, repeat=2):
        assert ext_mul(a, b) == ext_mul(b, a)
    for a, b, c in itertools.product(GRID, repeat=3):
        assert ext_mul(ext_mul(a, b), c) == ext_mul(a, ext_mul(b, c))
    for a, b, c in itertools.product(GRID, repeat=3):
        if a <= b:
            assert ext_mul(a, c) <= ext_mul(b, c)


@pytest.mark.parametrize('p, expected', [(2.0, 2.0), (1.0, math.inf), (math.inf, 1.0), (0.5, 1.0), (4.0, 4.0 / 3.0)])
def test_conjugate(p, expected):
    assert conjugate(p) == pytest.approx(expected)


@pytest.mark.parametrize('p', [1.0, 1.5, 2.0, 3.0, 4.0, math.inf])
def test_conjugate_is_an_involution_from_one(p):
    assert conjugate(conjugate(p)) == pytest.approx(p)


def test_conjugate_below_one_is_not_an_involution():
    # p/(1-p) maps (0, 1) into (0, inf) without returning
    assert conjugate(conjugate(0.25)) == pytest.approx(0.5)
    assert conjugate(conjugate(0.5)) == math.inf


@pytest.mark.parametrize('p, q, expected', [
    (1.0, 2.0, 2.0),
    (2.0, 2.0, math.inf),
    (2.0, 1.0, math.inf),
    (1.0, math.inf, 1.0),
    (2.0, 4.0, 4.0),
])
def test_holder_rho(p, q, expected):
    assert holder_rho(p, q) == expected


def test_lp_sum():
    assert lp_sum([3.0, 4.0], 2.0) == 5.0
    assert lp_sum([1.0, 2.0, 3.0], math.inf) == 3.0
    assert lp_sum([], 1.0) == 0.0
    assert lp_sum([1.0, math.inf], 2.0) == math.inf


def test_exponent_parsing():
    assert as_exponent('inf') == math.inf
    assert as_exponent(2) == 2.0
    with pytest.raises(DomainError):
        as_exponent(0)
    with pytest.raises(DomainError):
        as_exponent(-1.0)


def test_enclosure():
    enc = Enclosure(1.0, 2.0)
    assert enc.contains(1.5)
    assert enc.width == 1.0
    assert enc.power(2.0) == Enclosure(1.0, 4.0)
    assert (enc + Enclosure(1.0, 1.0)) == Enclosure(2.0, 3.0)
    assert Enclosure.exact(math.inf).is_infinite
    assert Enclosure.exact(2.0, 2.0 ** -36).contains(2.0)
    assert enc.to_dict() == {'lo': 1.0, 'hi': 2.0}
    assert Enclosure.infinite().to_dict() == {'lo': 'inf', 'hi': 'inf'}
    with pytest.raises(DomainError):
        Enclosure(2.0, 1.0)


def test_encode_ext():
    assert encode_ext(math.inf) == 'inf'
    assert encode_ext(-math.inf) == '-inf'
    assert encode_ext(0.5) == 0.5
