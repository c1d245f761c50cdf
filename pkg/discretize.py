"""
Discretizing Sequences
======================
Points x_N < ... < x_{M+1} at which phi(t) = ||u||_{q,(a,t+],nu} roughly doubles:

    (i)   N finite: phi(x_N) > 0 and phi = 0 on (a, x_N);  M finite: x_{M+1} = b
    (ii)  phi(x_{k+1}-) <= 2 phi(x_k)          N <= k <= M
    (iii) 2 phi(x_k-) <= phi(x_{k+1})          N <  k <  M

Sequences are built greedily: x_{k+1} = sup{t : phi(t-) <= 2 phi(x_k)}. When phi
vanishes at a point c and grows like a power of (t - c) right after it, the true
sequence is infinite towards c; it is stored from a seed where phi falls below
eps_rel * phi(b-) and the omitted head is self-similar (ratio theta in t - c).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from configs.solver_config import INVARIANT_RTOL, SOLVER_DEFAULTS
from measure import EndpointedInterval, Measure, cumulative_norm, merged_knots
from numerics import DomainError, HardyError, ext_pow, lp_sum
from stepfn import StepFunction, product_norm
from stieltjes import MonotoneFunction


logger = logging.getLogger(__name__)


class TruncationOverflow(HardyError):
    """Discretizing sequence longer than max_terms"""


def phi_function(u: StepFunction, q: float, nu: Measure) -> MonotoneFunction:
    """phi(t) = ||u||_{q,(a,t+],nu}, right-continuous and non-decreasing."""
    return cumulative_norm(u, q, nu, side='left', point='limit')


@dataclass(frozen=True)
class DiscretizingSequence:
    """
    Stored points x_N .. x_{M+1} (indices start .. start+len-1). For a truncated
    head the true sequence continues towards head_limit with
    x_{k-1} - c = theta (x_k - c) and phi(x_{k-1}) = phi(x_k) / 2.
    """
    points: Tuple[float, ...]
    start: int
    phi_values: Tuple[float, ...]
    phi_left: Tuple[float, ...]
    a: float
    b: float
    head_truncated: bool = False
    head_limit: Optional[float] = None
    head_ratio: float = 0.5
    head_bound: float = 0.0
    extra_knots: Tuple[float, ...] = field(default=())

    @property
    def N(self) -> int:
        return self.start

    @property
    def M(self) -> int:
        return self.start + len(self.points) - 2

    @property
    def x_N(self) -> float:
        """Left end of the region phi lives on: x_N, or the accumulation point of a truncated head."""
        if self.head_truncated:
            return self.head_limit
        return self.points[0]

    def indices(self) -> range:
        return range(self.N, self.M + 2)

    def certificate(self) -> Dict[str, object]:
        return {
            'head_truncated': self.head_truncated,
            'head_limit': self.head_limit,
            'head_ratio': self.head_ratio,
            'phi_head_bound': self.head_bound,
        }


# ============================================================================
# CONSTRUCTION
# ============================================================================

def _head(phi: MonotoneFunction) -> Tuple[int, bool]:
    """Cell index where phi stops vanishing and whether it does so continuously."""
    if phi.right[0] > 0:
        return 0, False
    for j in range(phi.n_cells):
        if phi.right[j] > 0:
            return j, False
        if phi.slope[j] > 0:
            return j, True
    raise DomainError("phi vanishes identically; u is zero nu-a.e.")


def _next_point(phi: MonotoneFunction, x: float, level: float) -> float:
    """sup{t > x : base(t-) <= level} in base space, exact from the piecewise form."""
    knots = phi.knots
    n = phi.n_cells
    j = int(phi.locate_cells(np.array([x]))[0])
    while j < n:
        end_base = phi.left[j + 1]
        if end_base > level:
            crossing = knots[j] + (level - phi.right[j]) / phi.slope[j]
            if not crossing > x:
                crossing = np.nextafter(x, np.inf)
            return float(min(crossing, knots[j + 1]))
        if j + 1 == n:
            return float(knots[n])
        if phi.right[j + 1] > level:
            return float(knots[j + 1])
        j += 1
    return float(knots[n])


def discretizing_sequence(phi: MonotoneFunction, max_terms: Optional[int] = None,
                          extra_knots: Sequence[float] = (),
                          eps_rel: Optional[float] = None) -> DiscretizingSequence:
    """
    Greedy discretizing sequence of a right-continuous non-decreasing phi.

    extra_knots keeps a truncated head inside a single cell of other data
    (weights, measures) so the omitted terms can be summed in closed form.
    """
    max_terms = SOLVER_DEFAULTS['max_terms'] if max_terms is None else max_terms
    eps_rel = SOLVER_DEFAULTS['eps_rel'] if eps_rel is None else eps_rel
    if not phi.increasing or phi.scale != 1.0 or phi.power <= 0:
        raise DomainError("Discretizing sequences need a non-decreasing phi = base**power")
    if not np.array_equal(phi.at, phi.right):
        raise DomainError("phi must be right-continuous")

    factor = 2.0 ** (1.0 / phi.power)
    j, continuous = _head(phi)
    knots = phi.knots
    head_limit = None
    head_bound = 0.0
    if continuous:
        head_limit = float(knots[j])
        extra = np.asarray([s for s in extra_knots if head_limit < s < knots[j + 1]], dtype=float)
        s1 = float(min(knots[j + 1], extra.min())) if extra.size else float(knots[j + 1])
        total = phi.left_limit(phi.b)
        cell_top = phi.transform(phi.base_inside(np.array([s1]), np.array([j]))[0])
        level = min(eps_rel * total, 0.5 * cell_top)
        base_level = ext_pow(level, 1.0 / phi.power)
        x = head_limit + base_level / phi.slope[j]
        if not head_limit < x < s1:
            x = head_limit + 0.5 * (s1 - head_limit)
        head_bound = phi.value(x)
    else:
        x = float(knots[j])

    points = [x]
    while x < phi.b:
        x = _next_point(phi, x, phi.base_value(x) * factor)
        points.append(x)
        if len(points) > max_terms:
            raise TruncationOverflow(f"Discretizing sequence exceeds max_terms={max_terms}")

    start = -(len(points) - 2) if continuous else 0
    d = DiscretizingSequence(
        points=tuple(points),
        start=start,
        phi_values=tuple(phi.value(t) for t in points),
        phi_left=tuple(phi.left_limit(t) for t in points),
        a=phi.a,
        b=phi.b,
        head_truncated=continuous,
        head_limit=head_limit,
        head_ratio=1.0 / factor,
        head_bound=head_bound,
        extra_knots=tuple(float(s) for s in extra_knots),
    )
    logger.debug("Discretizing sequence: %d points, N=%d, head truncated=%s", len(points), d.N, continuous)
    return d


# ============================================================================
# INVARIANTS
# ============================================================================

@dataclass
class InvariantReport:
    ok: bool = True
    failures: List[str] = field(default_factory=list)

    def fail(self, message: str) -> None:
        self.ok = False
        self.failures.append(message)


def check_invariants(phi: MonotoneFunction, d: DiscretizingSequence,
                     rtol: Optional[float] = None) -> InvariantReport:
    """Independent check of (i)-(iii) with relative slack rtol for crossing-point rounding."""
    rtol = INVARIANT_RTOL if rtol is None else rtol
    report = InvariantReport()
    x = d.points
    if any(t1 <= t0 for t0, t1 in zip(x, x[1:])):
        report.fail("points are not strictly increasing")
    if x[-1] != phi.b:
        report.fail(f"last point {x[-1]} is not b = {phi.b}")
    if not d.head_truncated:
        if not phi.value(x[0]) > 0:
            report.fail(f"phi(x_N) = {phi.value(x[0])} is not positive")
        if x[0] > phi.a and phi.left_limit(x[0]) != 0:
            report.fail(f"phi does not vanish on (a, x_N) = ({phi.a}, {x[0]})")
    else:
        if phi.value(d.head_limit) != 0 or not x[0] > d.head_limit:
            report.fail("truncated head does not start after a zero of phi")

    last = len(x) - 2
    for i in range(last + 1):
        k = d.start + i
        if phi.left_limit(x[i + 1]) > 2.0 * phi.value(x[i]) * (1.0 + rtol):
            report.fail(f"(ii) fails at k={k}: phi(x_(k+1)-) > 2 phi(x_k)")
    first_iii = 0 if d.head_truncated else 1
    for i in range(first_iii, last):
        k = d.start + i
        if 2.0 * phi.left_limit(x[i]) > phi.value(x[i + 1]) * (1.0 + rtol):
            report.fail(f"(iii) fails at k={k}: 2 phi(x_k-) > phi(x_(k+1))")
    return report


# ============================================================================
# COVERING INTERVALS AND THE DISCRETE SUPREMAL NORM
# ============================================================================

def covering_intervals(d: DiscretizingSequence) -> List[EndpointedInterval]:
    """J_k = (x_k, x_{k+1}] for N <= k < M and J_M = (x_M, b)."""
    x = d.points
    out = [EndpointedInterval.open_closed(x[i], x[i + 1]) for i in range(len(x) - 2)]
    out.append(EndpointedInterval.open(x[-2], x[-1]))
    return out


def head_interval(d: DiscretizingSequence) -> Optional[EndpointedInterval]:
    """(c, x_N] covered by the omitted terms of a truncated head."""
    if not d.head_truncated:
        return None
    return EndpointedInterval.open_closed(d.head_limit, d.points[0])


def _check_provenance(phi: MonotoneFunction, d: DiscretizingSequence) -> None:
    for t, stored in zip(d.points, d.phi_values):
        if phi.value(t) != stored:
            raise DomainError(f"Discretizing sequence was not built from this phi (mismatch at {t})")


def discretized_rhs(g: StepFunction, u: StepFunction, q: float, nu: Measure, mu: Measure,
                    d: DiscretizingSequence) -> float:
    """||{||g||_{inf,J_k,mu} phi(x_k)}||_q over the full (head-completed) index range."""
    phi = phi_function(u, q, nu)
    _check_provenance(phi, d)
    terms = np.array([
        product_norm([g], math.inf, J, mu) * phi_k if phi_k > 0 else 0.0
        for J, phi_k in zip(covering_intervals(d), d.phi_values[:-1])
    ])
    stored = lp_sum(terms, q)

    head = head_interval(d)
    if head is None:
        return stored
    head_sup = product_norm([g], math.inf, head, mu)
    if head_sup == 0:
        return stored
    cells = merged_knots(g.knots(), mu.knots())
    if np.any((cells > head.left) & (cells < head.right)):
        logger.warning("Test function is not uniform on the truncated head; head tail is an upper bound")
    phi0 = d.phi_values[0]
    if math.isinf(q):
        return max(stored, head_sup * phi0 / 2.0)
    tail = (head_sup * phi0) ** q / (2.0 ** q - 1.0)
    return ext_pow(stored ** q + tail, 1.0 / q)


def to_frame(d: DiscretizingSequence) -> pd.DataFrame:
    """Tabular view: one row per point with phi(x_k-), phi(x_k) and J_k."""
    intervals = [J.describe() for J in covering_intervals(d)] + ['']
    return pd.DataFrame({
        'k': list(d.indices()),
        'x_k': list(d.points),
        'phi_left': list(d.phi_left),
        'phi': list(d.phi_values),
        'J_k': intervals,
    })
