"""
Lebesgue-Stieltjes Integration
==============================
Monotone functions with exact one-sided limits and Lebesgue-Stieltjes
integrals against them, with rigorous enclosures.

A MonotoneFunction is T(base(t)) with T(y) = scale * y**power and a base that is
affine inside each cell between knots and may jump at knots. Cumulative norms
||u||_{q,(a,t],nu} are exactly of this form (base = int u^q dnu, power = 1/q), and
so are the integrands and integrators of the integral-type constants.

Conventions for integrators that are infinite on a plateau:
    (-inf on (a,c))   int_(a,b) f dh = int_(c,b) f dh, only if f = 0 on (a,c]
    (+inf on (c,b))   int_(a,b) f dh = int_(a,c) f dh, only if f = 0 on [c,b)
Anything else raises ConventionViolation.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from configs.solver_config import SOLVER_DEFAULTS
from measure import EndpointedInterval, Measure, merged_knots
from numerics import DomainError, Enclosure, HardyError, ext_div, ext_pow, ext_pow_array


logger = logging.getLogger(__name__)


class ConventionViolation(HardyError):
    """Integrator infinite where the integrand does not vanish"""


class ToleranceNotMet(HardyError):
    """Enclosure width above tolerance after the refinement budget"""


# ============================================================================
# MONOTONE FUNCTIONS
# ============================================================================

@dataclass(frozen=True, eq=False)
class MonotoneFunction:
    """
    Monotone function on (a, b) given by knots a = s_0 < ... < s_n = b and, at
    every knot, the base value (at), left limit and right limit. Inside cell j
    the base is affine with derivative slope[j]. Value at a is the right limit,
    value at b the left limit.
    """
    knots: np.ndarray
    left: np.ndarray
    at: np.ndarray
    right: np.ndarray
    slope: np.ndarray
    base_increasing: bool
    power: float = 1.0
    scale: float = 1.0
    label: str = ''

    def __post_init__(self):
        for name in ('knots', 'left', 'at', 'right', 'slope'):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.knots) - 1
        if n < 1 or np.any(np.diff(self.knots) <= 0):
            raise DomainError("Monotone function knots must be strictly increasing")
        if not (len(self.left) == len(self.at) == len(self.right) == n + 1 and len(self.slope) == n):
            raise DomainError("Monotone function arrays have inconsistent lengths")
        if self.scale == 0 or self.power == 0:
            raise DomainError("Transform needs non-zero scale and power")
        if np.any(self.left < 0) or np.any(self.right < 0) or np.any(self.at < 0):
            raise DomainError("Monotone function base must be non-negative")

        sequence = np.empty(3 * n - 1)
        sequence[0] = self.right[0]
        pos = 1
        for j in range(1, n):
            sequence[pos:pos + 3] = (self.left[j], self.at[j], self.right[j])
            pos += 3
        sequence[pos] = self.left[n]
        steps = np.diff(sequence)
        slack = 1e-12 * max(float(np.max(np.abs(sequence))), 1.0)
        if self.base_increasing:
            ok = np.all(steps >= -slack) and np.all(self.slope >= 0)
        else:
            ok = np.all(steps <= slack) and np.all(self.slope <= 0)
        if not ok:
            raise DomainError(f"Function {self.label or ''} is not monotone in the stated direction")

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @classmethod
    def piecewise_linear(cls, knots, values, label: str = '') -> 'MonotoneFunction':
        """Continuous monotone function interpolating values at finite knots."""
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(knots)):
            raise DomainError("piecewise_linear needs finite knots")
        slope = np.diff(values) / np.diff(knots)
        increasing = bool(np.all(slope >= 0))
        return cls(knots, values, values.copy(), values.copy(), slope, increasing, label=label)

    @classmethod
    def from_step(cls, f, label: str = '') -> 'MonotoneFunction':
        """Monotone step function (any closure, point values honored)."""
        knots = f.knots()
        n = len(knots) - 1
        cells = np.array([f.value_on_open(c, d) for c, d in zip(knots[:-1], knots[1:])])
        left = np.concatenate(([cells[0]], cells))
        right = np.concatenate((cells, [cells[-1]]))
        at = np.array([f.value(s) for s in knots])
        at[0], at[-1] = right[0], left[-1]
        if f.is_monotone(increasing=True):
            increasing = True
        elif f.is_monotone(increasing=False):
            increasing = False
        else:
            raise DomainError("Step function is not monotone")
        return cls(knots, left, at, right, np.zeros(n), increasing, label=label)

    # ------------------------------------------------------------------
    # transforms
    # ------------------------------------------------------------------

    @property
    def n_cells(self) -> int:
        return len(self.knots) - 1

    @property
    def a(self) -> float:
        return float(self.knots[0])

    @property
    def b(self) -> float:
        return float(self.knots[-1])

    @property
    def increasing(self) -> bool:
        transform_increasing = (self.power > 0) == (self.scale > 0)
        return self.base_increasing == transform_increasing

    def transformed(self, scale: float = 1.0, power: float = 1.0, label: str = '') -> 'MonotoneFunction':
        """y -> scale * y**power applied on top of the current transform."""
        if self.scale != 1.0:
            raise DomainError("Only unscaled functions can be composed with a power")
        return replace(self, scale=scale, power=self.power * power, label=label or self.label)

    def with_point(self, which: str) -> 'MonotoneFunction':
        """Same function with the knot values replaced by the left or right limits."""
        if which not in ('left', 'right'):
            raise DomainError(f"which must be 'left' or 'right', got {which!r}")
        return replace(self, at=(self.left if which == 'left' else self.right).copy())

    def transform(self, y):
        """T(y) = scale * y**power on [0, inf], elementwise."""
        out = ext_pow_array(np.asarray(y, dtype=float), self.power)
        out = self.scale * out
        return float(out) if np.ndim(out) == 0 else out

    # ------------------------------------------------------------------
    # base evaluation
    # ------------------------------------------------------------------

    def locate_cells(self, t: np.ndarray) -> np.ndarray:
        """Index of the cell whose interior contains (t, t+)."""
        idx = np.searchsorted(self.knots, t, side='right') - 1
        return np.clip(idx, 0, self.n_cells - 1)

    def base_inside(self, t: np.ndarray, idx: np.ndarray) -> np.ndarray:
        """Affine base of cell idx at t, anchored at the end the base grows away from."""
        t = np.asarray(t, dtype=float)
        idx = np.asarray(idx)
        slope = self.slope[idx]
        with np.errstate(invalid='ignore', over='ignore'):
            from_left = self.right[idx] + slope * (t - self.knots[idx])
            from_right = self.left[idx + 1] + slope * (t - self.knots[idx + 1])
        out = np.where(slope > 0, from_left, from_right)
        out = np.where(slope == 0, self.right[idx], out)
        return np.maximum(out, 0.0)

    def cell_limits(self, c: np.ndarray, d: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Base limits at c+ and d- for cells (c, d) lying inside single cells."""
        c = np.asarray(c, dtype=float)
        d = np.asarray(d, dtype=float)
        idx = self.locate_cells(c)
        at_left = np.where(c == self.knots[idx], self.right[idx], self.base_inside(c, idx))
        at_right = np.where(d == self.knots[idx + 1], self.left[idx + 1], self.base_inside(d, idx))
        return at_left, at_right

    def _base(self, t: float, which: str) -> float:
        if t <= self.knots[0]:
            return float(self.right[0])
        if t >= self.knots[-1]:
            return float(self.left[-1])
        j = int(np.searchsorted(self.knots, t, side='left'))
        if self.knots[j] == t:
            return float(getattr(self, which)[j])
        return float(self.base_inside(np.array([t]), np.array([j - 1]))[0])

    def base_value(self, t: float) -> float:
        return self._base(t, 'at')

    def base_left(self, t: float) -> float:
        return self._base(t, 'left')

    def base_right(self, t: float) -> float:
        return self._base(t, 'right')

    def value(self, t: float) -> float:
        return self.transform(self.base_value(t))

    def left_limit(self, t: float) -> float:
        return self.transform(self.base_left(t))

    def right_limit(self, t: float) -> float:
        return self.transform(self.base_right(t))


# ============================================================================
# STIELTJES MEASURE
# ============================================================================

def _check_interval(phi: MonotoneFunction, e: EndpointedInterval) -> None:
    if e.left < phi.a or e.right > phi.b:
        raise DomainError(f"Interval {e.describe()} is not contained in ({phi.a}, {phi.b})")


def ls_measure(phi: MonotoneFunction, e: EndpointedInterval) -> float:
    """
    Measure of e induced by phi:
        [x,y] -> phi(y+) - phi(x-)     [x,y) -> phi(y-) - phi(x-)
        (x,y] -> phi(y+) - phi(x+)     (x,y) -> phi(y-) - phi(x+)
    For non-increasing phi the measure induced by -phi is returned.
    """
    _check_interval(phi, e)
    if e.is_empty:
        return 0.0
    upper = phi.right_limit(e.right) if e.right_closed else phi.left_limit(e.right)
    lower = phi.left_limit(e.left) if e.left_closed else phi.right_limit(e.left)
    if math.isinf(upper) and math.isinf(lower) and upper == lower:
        if (phi.base_right(e.right) if e.right_closed else phi.base_left(e.right)) == \
                (phi.base_left(e.left) if e.left_closed else phi.base_right(e.left)):
            return 0.0
        raise ConventionViolation(f"Stieltjes measure of {e.describe()} is inf - inf")
    return abs(upper - lower)


# ============================================================================
# STIELTJES INTEGRAL
# ============================================================================

def _pow_diff(y0: np.ndarray, y1: np.ndarray, k: float) -> np.ndarray:
    """y1**k - y0**k without cancellation for nearby arguments."""
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        ratio = np.where(y0 > 0, (y1 - y0) / np.where(y0 > 0, y0, 1.0), 0.0)
        relative = np.power(np.where(y0 > 0, y0, 1.0), k) * np.expm1(k * np.log1p(ratio))
        from_zero = np.power(y1, k)
    return np.where(y0 > 0, relative, from_zero)


def _power_integral(y0: np.ndarray, y1: np.ndarray, b: float) -> np.ndarray:
    """int_{y0}^{y1} y**b dy."""
    if b == -1.0:
        with np.errstate(divide='ignore'):
            return np.log(y1 / y0)
    return _pow_diff(y0, y1, b + 1.0) / (b + 1.0)


def _cell_bounds(F: MonotoneFunction, phi: MonotoneFunction, c: np.ndarray, d: np.ndarray,
                 idx_f: np.ndarray, idx_phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lower/upper bounds of int_(c,d) F d|phi| on regular cells. First-order bounds use
    the monotone extremes of F; second-order bounds use that F is convex (power >= 1)
    or concave (power <= 1) in the base of phi, bracketing it between its chord and
    its midpoint tangent and integrating those lines against dphi in closed form.
    """
    y0 = phi.base_inside(c, idx_phi)
    y1 = phi.base_inside(d, idx_phi)
    fb0 = F.base_inside(c, idx_f)
    fb1 = F.base_inside(d, idx_f)
    f0 = F.transform(fb0)
    f1 = F.transform(fb1)
    b = phi.power

    m0 = phi.scale * _pow_diff(y0, y1, b)
    orient = np.sign(m0)
    mass = np.abs(m0)
    lo1 = np.minimum(f0, f1) * mass
    hi1 = np.maximum(f0, f1) * mass

    hy = y1 - y0
    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        t1 = phi.transform(y1)
        m1 = hy * t1 - phi.scale * _power_integral(y0, y1, b)
        chord_slope = (f1 - f0) / hy
        chord = (f0 * m0 + chord_slope * m1) * orient

        fbm = 0.5 * (fb0 + fb1)
        fm = F.transform(fbm)
        kappa = (fb1 - fb0) / hy
        tangent_slope = np.where(fbm > 0, F.scale * F.power * ext_pow_array(fbm, F.power - 1.0) * kappa, 0.0)
        tangent = ((fm - 0.5 * tangent_slope * hy) * m0 + tangent_slope * m1) * orient

    if F.power >= 1.0:
        lower, upper = tangent, chord
    else:
        lower, upper = chord, tangent

    lo = np.where(np.isfinite(lower), np.maximum(lo1, lower), lo1)
    hi = np.where(np.isfinite(upper), np.minimum(hi1, upper), hi1)
    inconsistent = lo > hi
    lo = np.where(inconsistent, lo1, lo)
    hi = np.where(inconsistent, hi1, hi)
    return lo, hi


def ls_integral(F: MonotoneFunction, phi: MonotoneFunction, e: EndpointedInterval,
                tol: Optional[float] = None, budget: Optional[int] = None) -> Enclosure:
    """
    Enclosure of int_e F d|phi| for a non-negative monotone integrand F.

    For non-decreasing phi this is the Lebesgue-Stieltjes integral; for
    non-increasing phi it is the integral against the measure of -phi.
    Jumps of phi are weighted with F at the jump point; cells where both F and
    phi are powers of affine functions vanishing at the same end are integrated
    in closed form; all other cells are bracketed and bisected until the
    enclosure width is at most tol times its upper end.
    """
    tol = SOLVER_DEFAULTS['tol'] if tol is None else tol
    budget = SOLVER_DEFAULTS['refinement_budget'] if budget is None else budget
    slack = SOLVER_DEFAULTS['rounding_slack']

    if F.scale <= 0 or F.power <= 0:
        raise DomainError("Integrand must be a non-negative power of its base")
    _check_interval(phi, e)
    _check_interval(F, e)
    if e.is_empty:
        return Enclosure(0.0, 0.0)

    knots = merged_knots(F.knots, phi.knots)
    inner = knots[(knots > e.left) & (knots < e.right)]
    grid = np.concatenate(([e.left], inner, [e.right]))

    exact = 0.0

    # jumps of the integrator
    jump_points = list(inner)
    if e.left_closed:
        jump_points.insert(0, e.left)
    if e.right_closed and e.right > e.left:
        jump_points.append(e.right)
    for s in jump_points:
        yl, yr = phi.base_left(s), phi.base_right(s)
        if yl == yr:
            continue
        jump = abs(phi.transform(yr) - phi.transform(yl))
        weight = F.value(s)
        if math.isinf(jump):
            if weight == 0:
                continue
            raise ConventionViolation(f"Integrator jumps to infinity at {s} where the integrand is {weight}")
        exact += weight * jump

    if len(grid) < 2 or e.left == e.right:
        return Enclosure.exact(exact, slack)

    c, d = grid[:-1], grid[1:]
    idx_phi = phi.locate_cells(c)
    idx_f = F.locate_cells(c)
    y0, y1 = phi.cell_limits(c, d)
    fb0, fb1 = F.cell_limits(c, d)
    phi_slope = phi.slope[idx_phi]
    f_slope = F.slope[idx_f]

    flat = phi_slope == 0
    infinite_level = phi.power < 0
    plateau = flat & infinite_level & (y0 == 0)
    if np.any(plateau & (np.maximum(fb0, fb1) > 0)):
        where = c[plateau & (np.maximum(fb0, fb1) > 0)][0]
        raise ConventionViolation(f"Integrator is infinite on a plateau after {where} where the integrand is positive")

    singular = ~flat & infinite_level & ((y0 == 0) | (y1 == 0))
    regular = ~flat & ~singular
    if np.any(regular & ~np.isfinite(d - c)):
        raise DomainError("Integrator varies on an unbounded cell")

    for j in np.flatnonzero(singular):
        from_left = y0[j] == 0
        f_end = fb0[j] if from_left else fb1[j]
        if f_end > 0:
            raise ConventionViolation(
                f"Integrator is infinite at {c[j] if from_left else d[j]} where the integrand is positive")
        beta = abs(f_slope[j])
        if beta == 0:
            continue
        a_exp, b_exp = F.power, phi.power
        if a_exp + b_exp <= 0:
            logger.debug("Divergent power-law cell (%s, %s)", c[j], d[j])
            return Enclosure.infinite()
        delta = abs(phi_slope[j])
        h = d[j] - c[j]
        exact += (F.scale * abs(phi.scale) * abs(b_exp) * ext_pow(delta, b_exp) * ext_pow(beta, a_exp)
                  * ext_pow(h, a_exp + b_exp) / (a_exp + b_exp))

    if math.isinf(exact):
        return Enclosure.infinite()

    split_into = SOLVER_DEFAULTS['initial_split'] if np.any(regular) else 1
    steps = np.arange(split_into) / split_into
    starts = c[regular][:, None] + (d - c)[regular][:, None] * steps
    ends = np.empty_like(starts)
    ends[:, :-1] = starts[:, 1:]
    ends[:, -1] = d[regular]
    sub_c = starts.ravel()
    sub_d = ends.ravel()
    sub_f = np.repeat(idx_f[regular], split_into)
    sub_phi = np.repeat(idx_phi[regular], split_into)
    lo_best, hi_best = exact, math.inf if np.any(regular) else exact
    rounds = 0
    while len(sub_c):
        lo, hi = _cell_bounds(F, phi, sub_c, sub_d, sub_f, sub_phi)
        lo_best = max(lo_best, exact + float(np.sum(lo)))
        hi_best = min(hi_best, exact + float(np.sum(hi)))
        if hi_best - lo_best <= tol * max(hi_best, np.finfo(float).tiny):
            break
        # the bisection schedule does not depend on tol
        gap = hi - lo
        split = (gap > 0) & (gap >= float(np.mean(gap)))
        if len(sub_c) + int(np.count_nonzero(split)) > budget:
            raise ToleranceNotMet(
                f"Stieltjes enclosure [{lo_best}, {hi_best}] wider than tol={tol} "
                f"after {len(sub_c)} cells")
        mid = 0.5 * (sub_c[split] + sub_d[split])
        sub_c = np.concatenate((sub_c[~split], sub_c[split], mid))
        sub_d = np.concatenate((sub_d[~split], mid, sub_d[split]))
        sub_f = np.concatenate((sub_f[~split], sub_f[split], sub_f[split]))
        sub_phi = np.concatenate((sub_phi[~split], sub_phi[split], sub_phi[split]))
        rounds += 1

    logger.debug("Stieltjes integral: %d regular cells after %d rounds", len(sub_c), rounds)
    return Enclosure(max(0.0, lo_best), max(lo_best, hi_best)).widen(slack)


# ============================================================================
# ESSENTIAL SUPREMUM OF A RATIO
# ============================================================================

def _power_law_limit(beta_f: float, a_exp: float, beta_g: float, g_exp: float) -> float:
    """lim_{tau->0} (beta_f tau)**a / (beta_g tau)**g."""
    if beta_f == 0:
        return 0.0
    if a_exp > g_exp:
        return 0.0
    if a_exp < g_exp:
        return math.inf
    return ext_div(ext_pow(beta_f, a_exp), ext_pow(beta_g, g_exp))


def _cell_ratio_sup(F: MonotoneFunction, G: MonotoneFunction, c: float, d: float,
                    f0: float, f1: float, g0: float, g1: float,
                    f_slope: float, g_slope: float) -> float:
    """sup of F/G over the open cell (c, d) where both are continuous."""
    F0, F1 = F.transform(f0), F.transform(f1)
    G0, G1 = G.transform(g0), G.transform(g1)
    if g0 == 0 and g1 == 0:
        return math.inf if max(F0, F1) > 0 else 0.0
    if g0 == 0 or g1 == 0:
        zero_end_f = f0 if g0 == 0 else f1
        if zero_end_f > 0:
            return math.inf
        scale = F.scale / G.scale
        near = scale * _power_law_limit(abs(f_slope), F.power, abs(g_slope), G.power)
        far = ext_div(F1, G1) if g0 == 0 else ext_div(F0, G0)
        return max(near, far)

    candidates = [ext_div(F0, G0), ext_div(F1, G1)]
    a_exp, g_exp = F.power, G.power
    if a_exp != g_exp and f_slope != 0 and g_slope != 0 and math.isfinite(d - c):
        tau = (g_exp * g_slope * f0 - a_exp * f_slope * g0) / (f_slope * g_slope * (a_exp - g_exp))
        if 0 < tau < d - c:
            fb = max(f0 + f_slope * tau, 0.0)
            gb = max(g0 + g_slope * tau, 0.0)
            candidates.append(ext_div(F.transform(fb), G.transform(gb)))
    return max(candidates)


def ratio_supremum(F: MonotoneFunction, G: MonotoneFunction, m: Measure,
                   tol: Optional[float] = None) -> Enclosure:
    """
    Enclosure of ess sup_m F(x)/G(x) (0/0 = 0) for monotone F, G that are powers
    of piecewise-affine bases.

    Atoms of m are evaluated exactly. On an open cell with positive density
    log(F/G) has at most one critical point, so the supremum is the larger of
    the two endpoint limits and the critical value; cells where G vanishes are
    resolved from the power-law behaviour at the vanishing end. tol is unused
    beyond the rounding slack because every cell is resolved in closed form.
    """
    slack = SOLVER_DEFAULTS['rounding_slack']
    if F.scale <= 0 or G.scale <= 0 or F.power <= 0 or G.power <= 0:
        raise DomainError("ratio_supremum needs positive powers of non-negative bases")

    best = 0.0
    for s, _ in zip(m.atoms, m.masses):
        best = max(best, ext_div(F.value(s), G.value(s)))
        if math.isinf(best):
            return Enclosure.infinite()

    knots = merged_knots(F.knots, G.knots, m.knots())
    c, d = knots[:-1], knots[1:]
    rates = np.array([m.density_on_open(x, y) for x, y in zip(c, d)])
    keep = rates > 0
    if np.any(keep):
        c, d = c[keep], d[keep]
        f0, f1 = F.cell_limits(c, d)
        g0, g1 = G.cell_limits(c, d)
        f_slope = F.slope[F.locate_cells(c)]
        g_slope = G.slope[G.locate_cells(c)]
        for j in range(len(c)):
            value = _cell_ratio_sup(F, G, c[j], d[j], f0[j], f1[j], g0[j], g1[j], f_slope[j], g_slope[j])
            best = max(best, value)
            if math.isinf(best):
                return Enclosure.infinite()

    return Enclosure.exact(best, slack)
