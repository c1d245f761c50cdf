"""
Characterization Constants
==========================
Evaluates, with enclosures, the constants that characterize

    ||g w||_{p,(a,b),mu} <= c ||u(x) ||g||_{inf,S_x,mu}||_{q,(a,b),nu}      for all g >= 0

with S_x = (x, b) (forward) or S_x = (a, x) (dual):

    A    discrete constant on a discretizing sequence of ||u||_{q,(a,t+],nu}
    A1   0 < q <= p <= inf     ess sup_mu ||w||_{p,(a,x]} / ||u||_{q,(a,x)}
    A2   0 < p < q < inf       (int ||w||^r_{p,(a,x]} d(-||u||^-r_{q,(a,x]}))^(1/r) + boundary term
    A3   0 < p < q = inf       (int (w / ||u||_{inf,(a,x)})^p dmu)^(1/p)

Dual constants B1..B3 are the A-constants of the reflected problem; the direct
right-anchored formulas are evaluated as cross-checks. Three-measure problems
(lambda instead of w) are reduced to w = (dlambda/dmu)^(1/p) first.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from configs.solver_config import SOLVER_DEFAULTS
from discretize import (
    DiscretizingSequence, TruncationOverflow, covering_intervals, discretizing_sequence, phi_function,
)
from measure import EndpointedInterval, Measure, cumulative_norm, merged_knots
from numerics import (
    DomainError, Enclosure, HardyError, as_exponent, encode_ext, ext_div, ext_pow, ext_root, holder_rho,
    lp_sum,
)
from stepfn import StepFunction, norm
from stieltjes import ConventionViolation, ToleranceNotMet, ls_integral, ratio_supremum


logger = logging.getLogger(__name__)


class NotAbsolutelyContinuous(HardyError):
    """lambda charges a mu-null set"""


class Direction(Enum):
    FORWARD = 'forward'
    DUAL = 'dual'


class Regime(Enum):
    Q_LE_P = 'QleP'
    P_LT_Q_FIN = 'PltQfin'
    Q_IS_INF = 'QisInf'


class Verdict(Enum):
    SATISFIED = 'satisfied'
    VIOLATED = 'violated'
    NOT_APPLICABLE = 'not-applicable'


# ============================================================================
# PROBLEMS
# ============================================================================

@dataclass(frozen=True)
class ProblemSpec:
    """Interval, exponents, direction, measures and weights of one inequality"""
    a: float
    b: float
    p: float
    q: float
    direction: Direction
    mu: Measure
    nu: Measure
    u: StepFunction
    w: Optional[StepFunction] = None
    lam: Optional[Measure] = None

    def __post_init__(self):
        object.__setattr__(self, 'p', as_exponent(self.p))
        object.__setattr__(self, 'q', as_exponent(self.q))
        object.__setattr__(self, 'direction', Direction(self.direction))
        if (self.w is None) == (self.lam is None):
            raise DomainError("Exactly one of w and lambda must be given")
        span = (self.a, self.b)
        parts = {'mu': self.mu, 'nu': self.nu, 'u': self.u}
        if self.w is not None:
            parts['w'] = self.w
        if self.lam is not None:
            parts['lambda'] = self.lam
        for name, part in parts.items():
            if (part.a, part.b) != span:
                raise DomainError(f"{name} lives on ({part.a}, {part.b}), expected {span}")

    @property
    def is_three_measure(self) -> bool:
        return self.lam is not None

    def weight(self) -> StepFunction:
        """w, or (dlambda/dmu)^(1/p) for three-measure problems."""
        if self.w is not None:
            return self.w
        return reduce_three_measure(self.lam, self.mu, self.p)


def regime(p: float, q: float) -> Regime:
    p = as_exponent(p)
    q = as_exponent(q)
    if q <= p:
        return Regime.Q_LE_P
    if math.isinf(q):
        return Regime.Q_IS_INF
    return Regime.P_LT_Q_FIN


def reflect(spec: ProblemSpec) -> ProblemSpec:
    """Mirror x -> -x: measures lambda~(E) = lambda(-E), weights h~(x) = h(-x), direction flipped."""
    flipped = Direction.DUAL if spec.direction is Direction.FORWARD else Direction.FORWARD
    return ProblemSpec(
        a=-spec.b,
        b=-spec.a,
        p=spec.p,
        q=spec.q,
        direction=flipped,
        mu=spec.mu.reflected(),
        nu=spec.nu.reflected(),
        u=spec.u.reflected(),
        w=None if spec.w is None else spec.w.reflected(),
        lam=None if spec.lam is None else spec.lam.reflected(),
    )


def reduce_three_measure(lam: Measure, mu: Measure, p: float) -> StepFunction:
    """
    w = (dlambda/dmu)^(1/p) (indicator of dlambda/dmu > 0 when p = inf), so that
    ||g||_{p,lambda} = ||g w||_{p,mu} for all g >= 0.
    """
    p = as_exponent(p)
    if (lam.a, lam.b) != (mu.a, mu.b):
        raise DomainError("lambda and mu live on different intervals")
    for s in lam.atoms:
        if mu.atom_mass_at(s) == 0:
            raise NotAbsolutelyContinuous(f"lambda has an atom at {s} where mu has none")

    breaks = merged_knots(lam.breaks, mu.breaks)
    values = []
    for c, d in zip(breaks[:-1], breaks[1:]):
        lam_rate = lam.density_on_open(c, d)
        mu_rate = mu.density_on_open(c, d)
        if lam_rate > 0 and mu_rate == 0:
            raise NotAbsolutelyContinuous(f"lambda has density {lam_rate} on ({c}, {d}) where mu has none")
        values.append(ext_root(ext_div(lam_rate, mu_rate), p) if mu_rate > 0 else 0.0)
    points = tuple((s, ext_root(ext_div(lam.atom_mass_at(s), m), p)) for s, m in zip(mu.atoms, mu.masses))
    return StepFunction(tuple(breaks), tuple(values), 'right', points)


# ============================================================================
# DISCRETE CONSTANT
# ============================================================================

def problem_sequence(spec: ProblemSpec, max_terms: Optional[int] = None) -> DiscretizingSequence:
    """Discretizing sequence of ||u||_{q,(a,t+],nu}, head kept uniform for w and mu."""
    extra = merged_knots(spec.mu.knots(), spec.weight().knots())
    return discretizing_sequence(phi_function(spec.u, spec.q, spec.nu), max_terms, extra_knots=extra)


def vanishing_condition(spec: ProblemSpec, d: DiscretizingSequence) -> Verdict:
    """w = 0 mu-a.e. on (a, x_N] whenever x_N > a."""
    if spec.direction is not Direction.FORWARD:
        raise DomainError("The vanishing condition is stated for the forward problem; reflect first")
    x_n = d.x_N
    if not x_n > spec.a:
        return Verdict.NOT_APPLICABLE
    head = norm(spec.weight(), spec.p, EndpointedInterval.open_closed(spec.a, x_n), spec.mu)
    return Verdict.SATISFIED if head == 0 else Verdict.VIOLATED


def _head_contribution(spec: ProblemSpec, d: DiscretizingSequence, w: StepFunction,
                       rho: float) -> Tuple[float, Dict[str, Any]]:
    """
    Closed form for the omitted terms k < N of a truncated head. On the head
    cell w, mu and phi are uniform/self-similar, so the ratios form a geometric
    progression R_i = R_1 gamma^(i-1).
    """
    c = d.head_limit
    x0 = d.points[0]
    if any(c < s <= x0 for s in merged_knots(w.knots(), spec.mu.knots())):
        raise DomainError("Truncated head is not uniform for w and mu; rebuild with problem_sequence")
    theta = d.head_ratio
    w_h = w.value_on_open(c, x0)
    dens = spec.mu.density_on_open(c, x0)
    phi0 = d.phi_values[0]

    if math.isinf(spec.p):
        first = w_h if dens > 0 else 0.0
        gamma = 2.0
    else:
        first = ext_pow(ext_pow(w_h, spec.p) * dens * (x0 - c) * (1.0 - theta), 1.0 / spec.p)
        gamma = 2.0 ** (1.0 - spec.q / spec.p) if not math.isinf(spec.q) else 0.0
    r1 = ext_div(first, 0.5 * phi0)

    certificate = {'first_ratio': r1, 'gamma': gamma}
    if r1 == 0:
        return 0.0, certificate
    if math.isinf(rho):
        return (r1 if gamma <= 1.0 else math.inf), certificate
    return ext_pow(r1, rho) / (1.0 - ext_pow(gamma, rho)), certificate


def discrete_A(spec: ProblemSpec, d: DiscretizingSequence) -> Tuple[Enclosure, Dict[str, Any]]:
    """||{||w||_{p,J_k,mu} / ||u||_{q,(a,x_k+],nu}}||_rho, 1/rho = (1/p - 1/q)_+, head included."""
    w = spec.weight()
    rho = holder_rho(spec.p, spec.q)
    ratios = np.array([
        ext_div(norm(w, spec.p, J, spec.mu), phi_k)
        for J, phi_k in zip(covering_intervals(d), d.phi_values[:-1])
    ])
    stored = lp_sum(ratios, rho)
    certificate: Dict[str, Any] = dict(d.certificate(), N=d.N, M=d.M, stored_terms=len(ratios))
    if d.head_truncated:
        head, details = _head_contribution(spec, d, w, rho)
        certificate.update(details)
        certificate['head_contribution'] = head
        if math.isinf(rho):
            value = max(stored, head)
        else:
            value = ext_pow(ext_pow(stored, rho) + head, 1.0 / rho)
    else:
        value = stored
    return Enclosure.exact(value, SOLVER_DEFAULTS['rounding_slack']), certificate


# ============================================================================
# CONTINUOUS CONSTANTS
# ============================================================================

def _ratio_constant(w, u, p, q, mu, nu, side: str) -> Enclosure:
    F = cumulative_norm(w, p, mu, side=side, point='closed')
    G = cumulative_norm(u, q, nu, side=side, point='open')
    return ratio_supremum(F, G, mu)


def _integral_constant(w, u, p, q, mu, nu, side: str, point: str, tol: Optional[float],
                       notes: Optional[List[str]]) -> Enclosure:
    r = holder_rho(p, q)
    if math.isinf(r):
        raise DomainError("Integral constants need p < q")
    F = cumulative_norm(w, p, mu, side=side, point='closed').transformed(1.0, r)
    sign = -1.0 if side == 'left' else 1.0
    psi = cumulative_norm(u, q, nu, side=side, point=point).transformed(sign, -r)
    whole = EndpointedInterval.open(mu.a, mu.b)
    try:
        integral = ls_integral(F, psi, whole, tol)
    except ConventionViolation as exc:
        if notes is not None:
            notes.append(f"Integral is infinite: {exc}")
        return Enclosure.infinite()
    boundary = ext_div(norm(w, p, whole, mu), norm(u, q, whole, nu))
    return integral.power(1.0 / r) + Enclosure.exact(boundary, SOLVER_DEFAULTS['rounding_slack'])


def _exchange_constant(w, u, p, mu, nu, side: str) -> Enclosure:
    """(int (w / ||u||_{inf,S,nu})^p dmu)^(1/p), summed exactly over cells and atoms."""
    if math.isinf(p):
        raise DomainError("The exchange formula needs p < inf")
    G = cumulative_norm(u, math.inf, nu, side=side, point='open')
    knots = merged_knots(w.knots(), mu.knots(), G.knots)
    total = 0.0
    for c, d in zip(knots[:-1], knots[1:]):
        rate = mu.density_on_open(c, d)
        if rate == 0:
            continue
        level = float(G.right[G.locate_cells(np.array([c]))[0]])
        ratio = ext_div(w.value_on_open(c, d), level)
        total += ext_pow(ratio, p) * rate * (d - c) if ratio > 0 else 0.0
    for s, m in zip(mu.atoms, mu.masses):
        ratio = ext_div(w.value(s), G.value(s))
        total += ext_pow(ratio, p) * m if ratio > 0 else 0.0
    return Enclosure.exact(float(ext_pow(total, 1.0 / p)), SOLVER_DEFAULTS['rounding_slack'])


def constant_A1(spec: ProblemSpec, tol: Optional[float] = None) -> Enclosure:
    """ess sup over mu of ||w||_{p,(a,x],mu} / ||u||_{q,(a,x),nu}."""
    return _ratio_constant(spec.weight(), spec.u, spec.p, spec.q, spec.mu, spec.nu, 'left')


def constant_A2(spec: ProblemSpec, tol: Optional[float] = None, plus_limit: bool = False,
                notes: Optional[List[str]] = None) -> Enclosure:
    """
    Integral constant for p < q < inf. plus_limit uses the integrator
    -||u||_{q,(a,x+],nu}^-r, which also covers q = inf.
    """
    point = 'limit' if plus_limit else 'closed'
    return _integral_constant(spec.weight(), spec.u, spec.p, spec.q, spec.mu, spec.nu,
                              'left', point, tol, notes)


def constant_A3(spec: ProblemSpec, tol: Optional[float] = None) -> Enclosure:
    """(int (w(x) / ||u||_{inf,(a,x),nu})^p dmu(x))^(1/p); exact up to rounding."""
    return _exchange_constant(spec.weight(), spec.u, spec.p, spec.mu, spec.nu, 'left')


def _regime_constants(spec: ProblemSpec, tol: Optional[float], prefix: str,
                      notes: List[str]) -> Dict[str, Callable[[], Enclosure]]:
    kind = regime(spec.p, spec.q)
    if kind is Regime.Q_LE_P:
        return {f'{prefix}1': lambda: constant_A1(spec, tol)}
    if kind is Regime.P_LT_Q_FIN:
        return {f'{prefix}2': lambda: constant_A2(spec, tol, notes=notes)}
    return {f'{prefix}3': lambda: constant_A3(spec, tol)}


def _cross_checks(spec: ProblemSpec, tol: Optional[float], prefix: str,
                  notes: List[str]) -> Dict[str, Callable[[], Enclosure]]:
    kind = regime(spec.p, spec.q)
    if kind is Regime.P_LT_Q_FIN:
        return {f"{prefix}2'": lambda: constant_A2(spec, tol, plus_limit=True, notes=notes)}
    if kind is Regime.Q_IS_INF:
        return {f"{prefix}3_parts": lambda: constant_A2(spec, tol, plus_limit=True, notes=notes)}
    return {}


def _direct_dual_checks(spec: ProblemSpec, tol: Optional[float],
                        notes: List[str]) -> Dict[str, Callable[[], Enclosure]]:
    """Right-anchored formulas evaluated on the dual problem itself."""
    w = spec.weight()
    args = (w, spec.u, spec.p, spec.q, spec.mu, spec.nu)
    kind = regime(spec.p, spec.q)
    if kind is Regime.Q_LE_P:
        return {'B1_direct': lambda: _ratio_constant(*args, 'right')}
    if kind is Regime.P_LT_Q_FIN:
        return {'B2_direct': lambda: _integral_constant(*args, 'right', 'closed', tol, notes)}
    return {'B3_direct': lambda: _exchange_constant(w, spec.u, spec.p, spec.mu, spec.nu, 'right')}


# ============================================================================
# REPORTS
# ============================================================================

@dataclass
class ConstantsReport:
    """Everything computed for one problem"""
    regime: Regime
    direction: Direction
    constants: Dict[str, Enclosure] = field(default_factory=dict)
    cross_checks: Dict[str, Enclosure] = field(default_factory=dict)
    vanishing: Verdict = Verdict.NOT_APPLICABLE
    certificate: Dict[str, Any] = field(default_factory=dict)
    ratios: Dict[str, float] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    errors: Dict[str, str] = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        if self.vanishing is Verdict.VIOLATED:
            return False
        return all(not math.isinf(e.hi) for e in self.constants.values())

    @property
    def numerical_failure(self) -> bool:
        numerical = (ToleranceNotMet.__name__, TruncationOverflow.__name__)
        return any(kind in numerical for kind in self.errors.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'regime': self.regime.value,
            'direction': self.direction.value,
            'constants': {k: v.to_dict() for k, v in sorted(self.constants.items())},
            'cross_checks': {k: v.to_dict() for k, v in sorted(self.cross_checks.items())},
            'vanishing': self.vanishing.value,
            'finite': self.finite,
            'certificate': {k: _jsonable(v) for k, v in sorted(self.certificate.items())},
            'ratios': {k: encode_ext(v) for k, v in sorted(self.ratios.items())},
            'warnings': list(self.warnings),
            'notes': list(self.notes),
            'errors': dict(sorted(self.errors.items())),
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, float):
        return encode_ext(value)
    return value


def _run_parallel(tasks: Dict[str, Callable[[], Enclosure]], report: ConstantsReport,
                  target: Dict[str, Enclosure]) -> None:
    """Evaluate named constants on a thread pool; failures are recorded, not raised."""
    if not tasks:
        return
    results: Dict[str, Enclosure] = {}
    with ThreadPoolExecutor(max_workers=SOLVER_DEFAULTS['max_workers']) as executor:
        futures = {executor.submit(fn): name for name, fn in tasks.items()}
        for future in as_completed(futures):
            name = futures[future]
            try:
                results[name] = future.result()
            except HardyError as exc:
                logger.warning("Could not evaluate %s: %s", name, exc)
                report.errors[name] = type(exc).__name__
                report.warnings.append(f"{name}: {exc}")
    for name in sorted(results):
        target[name] = results[name]


def _ratio(top: Enclosure, bottom: Enclosure) -> float:
    return ext_div(top.midpoint, bottom.midpoint)


def _forward_report(spec: ProblemSpec, tol: Optional[float], max_terms: Optional[int],
                    prefix: str) -> ConstantsReport:
    report = ConstantsReport(regime=regime(spec.p, spec.q), direction=spec.direction)
    if math.isinf(spec.p) and math.isinf(spec.q):
        report.notes.append(f"p = q = inf: the best constant equals {prefix}1 exactly")
    if report.regime is Regime.Q_IS_INF:
        report.notes.append(f"q = inf: the best constant equals {prefix}3 exactly")

    try:
        spec.weight()
    except NotAbsolutelyContinuous as exc:
        logger.warning("Inequality fails: %s", exc)
        report.warnings.append(f"lambda is not absolutely continuous with respect to mu: {exc}")
        report.errors['reduction'] = type(exc).__name__
        report.constants[prefix] = Enclosure.infinite()
        for name in _regime_constants(spec, tol, prefix, report.notes):
            report.constants[name] = Enclosure.infinite()
        return report

    try:
        d = problem_sequence(spec, max_terms)
    except TruncationOverflow as exc:
        report.errors['discretization'] = type(exc).__name__
        report.warnings.append(str(exc))
        d = None

    if d is not None:
        report.vanishing = vanishing_condition(spec, d)
        report.constants[prefix], report.certificate = discrete_A(spec, d)
        if report.vanishing is Verdict.VIOLATED:
            report.warnings.append(f"w does not vanish mu-a.e. on (a, x_N] = ({spec.a}, {d.x_N}]")

    _run_parallel(_regime_constants(spec, tol, prefix, report.notes), report, report.constants)
    _run_parallel(_cross_checks(spec, tol, prefix, report.notes), report, report.cross_checks)

    if prefix in report.constants:
        discrete = report.constants[prefix]
        for name, value in report.constants.items():
            if name != prefix:
                report.ratios[f'{name}/{prefix}'] = _ratio(value, discrete)
                logger.info("%s/%s = %s", name, prefix, report.ratios[f'{name}/{prefix}'])
    return report


def constants_B(spec: ProblemSpec, tol: Optional[float] = None,
                max_terms: Optional[int] = None) -> ConstantsReport:
    """Dual constants: the A-constants of the reflected problem plus direct cross-checks."""
    if spec.direction is not Direction.DUAL:
        raise DomainError("constants_B needs a dual problem")
    report = _forward_report(reflect(spec), tol, max_terms, prefix='B')
    report.direction = Direction.DUAL
    if 'reduction' not in report.errors:
        _run_parallel(_direct_dual_checks(spec, tol, report.notes), report, report.cross_checks)
    return report


def compute_report(spec: ProblemSpec, tol: Optional[float] = None,
                   max_terms: Optional[int] = None) -> ConstantsReport:
    """Regime, discrete constant, regime constants, cross-checks and vanishing verdict."""
    if spec.direction is Direction.DUAL:
        return constants_B(spec, tol, max_terms)
    return _forward_report(spec, tol, max_terms, prefix='A')
