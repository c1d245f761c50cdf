import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from measure import EndpointedInterval, Measure, cumulative_norm
from numerics import DomainError
from stepfn import StepFunction
from stieltjes import ConventionViolation, MonotoneFunction, ls_integral, ls_measure, ratio_supremum


def identity():
    return MonotoneFunction.piecewise_linear([0.0, 1.0], [0.0, 1.0])


def unit_jump(at=0.5):
    """Right-continuous unit jump at `at`."""
    return MonotoneFunction.from_step(StepFunction((0.0, at, 1.0), (0.0, 1.0), closed='left'))


def minus_reciprocal():
    """-1/x on (0, 1)."""
    return identity().transformed(-1.0, -1.0)


# ============================================================================
# MONOTONE FUNCTIONS
# ============================================================================

def test_one_sided_limits_of_a_jump():
    phi = unit_jump()
    assert phi.left_limit(0.5) == 0.0
    assert phi.value(0.5) == 1.0
    assert phi.right_limit(0.5) == 1.0
    assert phi.value(0.25) == 0.0


def test_transform_direction():
    assert minus_reciprocal().increasing
    assert minus_reciprocal().value(0.5) == -2.0
    assert minus_reciprocal().right_limit(0.0) == -math.inf
    assert not identity().transformed(1.0, -1.0).increasing


def test_non_monotone_data_is_rejected():
    with pytest.raises(DomainError):
        MonotoneFunction.from_step(StepFunction((0.0, 0.25, 0.5, 1.0), (0.0, 1.0, 0.0)))


# ============================================================================
# STIELTJES MEASURE
# ============================================================================

def test_measure_of_identity():
    assert ls_measure(identity(), EndpointedInterval.open_closed(0.25, 0.75)) == 0.5


def test_measure_of_jump_by_closure():
    phi = unit_jump()
    assert ls_measure(phi, EndpointedInterval.closed(0.5, 0.5)) == 1.0
    assert ls_measure(phi, EndpointedInterval.open(0.5, 1.0)) == 0.0
    assert ls_measure(phi, EndpointedInterval.open(0.0, 0.5)) == 0.0
    assert ls_measure(phi, EndpointedInterval.open_closed(0.0, 0.5)) == 1.0


def test_measure_of_reciprocal():
    assert ls_measure(minus_reciprocal(), EndpointedInterval.open_closed(0.25, 0.5)) == 2.0
    assert ls_measure(minus_reciprocal(), EndpointedInterval.open(0.0, 0.5)) == math.inf


# ============================================================================
# STIELTJES INTEGRAL
# ============================================================================

def test_jump_is_weighted_by_the_integrand_at_the_jump():
    F = MonotoneFunction.from_step(StepFunction((0.0, 0.5, 1.0), (3.0, 5.0)))
    enc = ls_integral(F, unit_jump(), EndpointedInterval.open(0.0, 1.0))
    assert enc.contains(3.0)
    assert enc.width < 1e-9


def test_square_against_reciprocal():
    """int_(0,1) x^2 d(-1/x) = 1, a power-law cell vanishing at 0."""
    F = identity().transformed(1.0, 2.0)
    enc = ls_integral(F, minus_reciprocal(), EndpointedInterval.open(0.0, 1.0))
    assert enc.contains(1.0)
    assert enc.width < 1e-9


def test_zero_integrand():
    F = MonotoneFunction.piecewise_linear([0.0, 1.0], [0.0, 0.0])
    enc = ls_integral(F, identity(), EndpointedInterval.open(0.0, 1.0))
    assert enc.lo == 0.0 and enc.hi == 0.0


def test_plateau_convention():
    phi = MonotoneFunction.piecewise_linear([0.0, 0.5, 1.0], [0.0, 0.0, 1.0]).transformed(-1.0, -1.0)
    positive = MonotoneFunction.from_step(StepFunction.constant(0.0, 1.0, 1.0))
    with pytest.raises(ConventionViolation):
        ls_integral(positive, phi, EndpointedInterval.open(0.0, 1.0))

    vanishing = MonotoneFunction.piecewise_linear([0.0, 0.5, 1.0], [0.0, 0.0, 1.0]).transformed(1.0, 2.0)
    enc = ls_integral(vanishing, phi, EndpointedInterval.open(0.0, 1.0))
    assert enc.contains(1.0)


@given(
    a=st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0]),
    b=st.sampled_from([0.5, 1.0, 2.0, 3.0]),
    c=st.sampled_from([0.0625, 0.125, 0.25]),
    d=st.sampled_from([0.5, 0.75, 1.0]),
)
@settings(max_examples=100)
def test_power_integrals_are_enclosed(a, b, c, d):
    """Property: int_(c,d) x^a d(x^b) = b/(a+b) (d^(a+b) - c^(a+b)) lies in the enclosure."""
    F = identity().transformed(1.0, a)
    phi = identity().transformed(1.0, b)
    tol = 1e-7
    enc = ls_integral(F, phi, EndpointedInterval.open(c, d), tol=tol)
    expected = b / (a + b) * (d ** (a + b) - c ** (a + b))
    assert enc.contains(expected)
    assert enc.width <= (tol + 1e-9) * enc.hi


@given(
    a=st.sampled_from([1.0, 2.0, 3.0]),
    b=st.sampled_from([0.5, 1.5]),
    c=st.sampled_from([0.0625, 0.125, 0.25]),
)
@settings(max_examples=100)
def test_decreasing_power_integrators(a, b, c):
    """Property: int_(c,1) x^a d(-x^-b) = b/(a-b) (1 - c^(a-b))."""
    F = identity().transformed(1.0, a)
    phi = identity().transformed(-1.0, -b)
    enc = ls_integral(F, phi, EndpointedInterval.open(c, 1.0), tol=1e-7)
    assert enc.contains(b / (a - b) * (1.0 - c ** (a - b)))


def test_integral_is_additive():
    F = identity().transformed(1.0, 1.5)
    phi = identity().transformed(1.0, 2.0)
    whole = ls_integral(F, phi, EndpointedInterval.open(0.125, 1.0), tol=1e-8)
    head = ls_integral(F, phi, EndpointedInterval.open_closed(0.125, 0.5), tol=1e-8)
    tail = ls_integral(F, phi, EndpointedInterval.open(0.5, 1.0), tol=1e-8)
    assert whole.overlaps(head + tail)


def test_smaller_tolerance_refines_the_same_enclosure():
    w = StepFunction.constant(0.0, 1.0, 0.25)
    mu = Measure((0.0, 1.0), (0.25,), (1.0 / 16,), (0.25,))
    F = cumulative_norm(w, 1.0, mu).transformed(1.0, 2.0)
    psi = cumulative_norm(StepFunction.constant(0.0, 1.0, 1.0), 2.0, Measure.lebesgue(0.0, 1.0)).transformed(-1.0, -2.0)
    exact = (16.0 + 2.0 * math.log(16.0)) / 256.0

    tols = [1e-3 / 2 ** k for k in range(6)]
    encs = [ls_integral(F, psi, EndpointedInterval.open(0.0, 1.0), tol=tol) for tol in tols]
    for tol, enc in zip(tols, encs):
        assert enc.contains(exact)
        assert enc.width <= (tol + 1e-9) * enc.hi
    for big, small in zip(encs, encs[1:]):
        assert big.lo <= small.lo and small.hi <= big.hi


# ============================================================================
# RATIO SUPREMUM
# ============================================================================

LEBESGUE = Measure.lebesgue(0.0, 1.0)


def test_ratio_of_identity_to_constant():
    G = MonotoneFunction.from_step(StepFunction.constant(0.0, 1.0, 1.0))
    assert ratio_supremum(identity(), G, LEBESGUE).contains(1.0)


def test_equal_power_laws_have_a_finite_limit():
    root = identity().transformed(1.0, 0.5)
    assert ratio_supremum(root, root, LEBESGUE).contains(1.0)


def test_faster_denominator_gives_infinity():
    root = identity().transformed(1.0, 0.5)
    assert ratio_supremum(root, identity(), LEBESGUE).is_infinite


def test_interior_critical_point():
    """x / (1 + x)^2 on (0, 3) peaks at x = 1."""
    F = MonotoneFunction.piecewise_linear([0.0, 3.0], [0.0, 3.0])
    G = MonotoneFunction.piecewise_linear([0.0, 3.0], [1.0, 4.0]).transformed(1.0, 2.0)
    enc = ratio_supremum(F, G, Measure.lebesgue(0.0, 3.0))
    assert enc.contains(0.25)


def test_atoms_are_exact():
    G = MonotoneFunction.from_step(StepFunction.constant(0.0, 1.0, 1.0))
    enc = ratio_supremum(identity(), G, Measure.atomic(0.0, 1.0, [0.5], [1.0]))
    assert enc.contains(0.5)
    assert enc.hi < 0.51
