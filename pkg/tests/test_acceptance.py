"""End-to-end checks of the characterization against the brute-force oracle on random problems."""

import logging
import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from builders import PAIRS, specs
from characterize import compute_report
from configs.solver_config import EQUIVALENCE_BOUNDS
from oracle import best_constant_estimate


logger = logging.getLogger(__name__)

SLACK = 1.0 + 1e-9
WORST = {}


@pytest.fixture(scope='module', autouse=True)
def worst_ratios():
    yield WORST
    for name, value in sorted(WORST.items()):
        logger.info("Worst %s ratio over the suite: %.6g", name, value)


def record(name, x, y):
    """Keep the largest two-sided ratio max(x/y, y/x) seen for name."""
    if x > 0 and y > 0 and math.isfinite(x) and math.isfinite(y):
        WORST[name] = max(WORST.get(name, 1.0), x / y, y / x)


def within(x, y, K):
    """x and y agree up to a factor K, both infinite counting as agreement."""
    if math.isinf(x.hi) or math.isinf(y.hi):
        return math.isinf(x.hi) and math.isinf(y.hi)
    return x.lo <= K * y.hi * SLACK and y.lo <= K * x.hi * SLACK


@given(spec=specs(kind='QisInf'))
@settings(max_examples=50)
def test_oracle_attains_A3_when_q_is_infinite(spec):
    report = compute_report(spec)
    A3 = report.constants.get('A3')
    assume(A3 is not None and not A3.is_infinite)
    result = best_constant_estimate(spec, grid=2048, samples=256)
    if A3.lo == 0.0:
        assert result.c_lower == 0.0
    else:
        record('c_lower/A3', result.c_lower, A3.hi)
        assert 0.95 <= result.c_lower / A3.hi <= SLACK


@given(spec=specs(kind='QleP'))
@settings(max_examples=200)
def test_A_is_at_most_twice_A1(spec):
    report = compute_report(spec)
    assume(not report.errors)
    A, A1 = report.constants['A'], report.constants['A1']
    assert A.lo <= EQUIVALENCE_BOUNDS['A_LE_2_A1'] * A1.hi * SLACK


@given(spec=specs(kind='QleP'))
@settings(max_examples=200)
def test_A1_is_equivalent_to_A(spec):
    report = compute_report(spec)
    assume(not report.errors)
    A, A1 = report.constants['A'], report.constants['A1']
    record('A1/A', A1.midpoint, A.midpoint)
    assert within(A1, A, EQUIVALENCE_BOUNDS['K_A1'])


@given(spec=specs(kind='PltQfin'))
@settings(max_examples=200)
def test_A2_is_equivalent_to_A(spec):
    report = compute_report(spec, tol=1e-4)
    assume(not report.errors)
    A, A2 = report.constants['A'], report.constants['A2']
    record('A2/A', A2.midpoint, A.midpoint)
    assert within(A2, A, EQUIVALENCE_BOUNDS['K_A2'])


@pytest.mark.parametrize('kind', sorted(PAIRS))
@given(data=st.data())
@settings(max_examples=200)
def test_oracle_is_sandwiched_by_A(kind, data):
    """Property: A / K <= c_lower <= K A in every regime."""
    spec = data.draw(specs(kind=kind))
    report = compute_report(spec, tol=1e-4)
    A = report.constants.get('A')
    assume(A is not None and not A.is_infinite)
    c_lower = best_constant_estimate(spec, grid=64, samples=128).c_lower
    record(f'c_lower/A ({kind})', c_lower, A.midpoint)
    K = EQUIVALENCE_BOUNDS['K_ORACLE']
    assert c_lower <= K * A.hi * SLACK
    assert A.lo <= K * c_lower * SLACK
