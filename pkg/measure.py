"""
Computable Borel Measures
=========================
Non-negative Borel measures on an open interval (a, b) made of finitely many
atoms plus a piecewise-constant density, together with the cumulative
weighted norms built from them:

    t -> ||u||_{q,(a,t],m}      (left-anchored, non-decreasing)
    t -> ||u||_{q,[t,b),m}      (right-anchored, non-increasing)

and their open / one-sided-limit variants, for 0 < q <= inf.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence, Tuple

import numpy as np

from numerics import DomainError, HardyError, ext_pow_array

if TYPE_CHECKING:
    from stepfn import StepFunction
    from stieltjes import MonotoneFunction


logger = logging.getLogger(__name__)


class NonAdmissibleWeight(HardyError):
    """Cumulative norm is not finite at an interior point"""


# ============================================================================
# INTERVALS
# ============================================================================

@dataclass(frozen=True)
class Interval:
    """Open interval (a, b); a may be -inf and b may be +inf"""
    a: float
    b: float

    def __post_init__(self):
        if math.isnan(self.a) or math.isnan(self.b) or not self.a < self.b:
            raise DomainError(f"Interval needs a < b, got ({self.a}, {self.b})")

    def reflected(self) -> 'Interval':
        return Interval(-self.b, -self.a)


@dataclass(frozen=True)
class EndpointedInterval:
    """Interval with explicit endpoint closure, e.g. (left, right] or [left, right)"""
    left: float
    right: float
    left_closed: bool = False
    right_closed: bool = False

    def __post_init__(self):
        if self.left > self.right:
            raise DomainError(f"Endpointed interval needs left <= right, got {self.left} > {self.right}")
        if self.left_closed and math.isinf(self.left):
            raise DomainError("An infinite endpoint cannot be closed")
        if self.right_closed and math.isinf(self.right):
            raise DomainError("An infinite endpoint cannot be closed")

    @classmethod
    def open(cls, left: float, right: float) -> 'EndpointedInterval':
        return cls(left, right, False, False)

    @classmethod
    def closed(cls, left: float, right: float) -> 'EndpointedInterval':
        return cls(left, right, True, True)

    @classmethod
    def open_closed(cls, left: float, right: float) -> 'EndpointedInterval':
        """(left, right]"""
        return cls(left, right, False, not math.isinf(right))

    @classmethod
    def closed_open(cls, left: float, right: float) -> 'EndpointedInterval':
        """[left, right)"""
        return cls(left, right, not math.isinf(left), False)

    @property
    def is_empty(self) -> bool:
        if self.left < self.right:
            return False
        return not (self.left_closed and self.right_closed)

    def contains(self, t: float) -> bool:
        if self.left < t < self.right:
            return True
        if t == self.left and self.left_closed:
            return True
        return t == self.right and self.right_closed

    def reflected(self) -> 'EndpointedInterval':
        """-E = {-t : t in E}"""
        return EndpointedInterval(-self.right, -self.left, self.right_closed, self.left_closed)

    def describe(self) -> str:
        lb = '[' if self.left_closed else '('
        rb = ']' if self.right_closed else ')'
        return f"{lb}{self.left}, {self.right}{rb}"


def merged_knots(*groups: Iterable[float]) -> np.ndarray:
    """Sorted union of breakpoint groups."""
    values = [float(v) for g in groups for v in g]
    if not values:
        return np.empty(0)
    return np.unique(np.asarray(values, dtype=float))


# ============================================================================
# MEASURES
# ============================================================================

@dataclass(frozen=True)
class Measure:
    """
    Atoms (position, mass) strictly inside (a, b) plus a density that is constant
    on the open pieces of breaks = (a = t_0 < ... < t_n = b). Pieces of infinite
    length must carry zero density.
    """
    breaks: Tuple[float, ...]
    density: Tuple[float, ...]
    atoms: Tuple[float, ...] = field(default=())
    masses: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        breaks = tuple(float(t) for t in self.breaks)
        density = tuple(float(v) for v in self.density)
        atoms = tuple(float(s) for s in self.atoms)
        masses = tuple(float(m) for m in self.masses)
        object.__setattr__(self, 'breaks', breaks)
        object.__setattr__(self, 'density', density)
        object.__setattr__(self, 'atoms', atoms)
        object.__setattr__(self, 'masses', masses)

        if len(breaks) < 2:
            raise DomainError("A measure needs at least the two endpoints a < b")
        if any(math.isnan(t) for t in breaks) or any(t1 <= t0 for t0, t1 in zip(breaks, breaks[1:])):
            raise DomainError(f"Density breakpoints must be strictly increasing: {breaks}")
        if any(math.isinf(t) for t in breaks[1:-1]):
            raise DomainError("Only the endpoints a, b may be infinite")
        if len(density) != len(breaks) - 1:
            raise DomainError(f"Expected {len(breaks) - 1} density values, got {len(density)}")
        for i, value in enumerate(density):
            if math.isnan(value) or value < 0 or math.isinf(value):
                raise DomainError(f"Density values must be finite and >= 0, got {value}")
            if value > 0 and math.isinf(breaks[i + 1] - breaks[i]):
                raise DomainError("Density must vanish on unbounded pieces")
        if len(atoms) != len(masses):
            raise DomainError("Atom positions and masses differ in length")
        a, b = breaks[0], breaks[-1]
        for s, mass in zip(atoms, masses):
            if not a < s < b:
                raise DomainError(f"Atom {s} lies outside the open interval ({a}, {b})")
            if math.isnan(mass) or mass <= 0 or math.isinf(mass):
                raise DomainError(f"Atom masses must be finite and > 0, got {mass}")
        if any(s1 <= s0 for s0, s1 in zip(atoms, atoms[1:])):
            raise DomainError(f"Atom positions must be strictly increasing: {atoms}")

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @classmethod
    def lebesgue(cls, a: float, b: float, rate: float = 1.0) -> 'Measure':
        return cls((a, b), (rate,))

    @classmethod
    def zero(cls, a: float, b: float) -> 'Measure':
        return cls((a, b), (0.0,))

    @classmethod
    def atomic(cls, a: float, b: float, atoms: Sequence[float], masses: Sequence[float]) -> 'Measure':
        return cls((a, b), (0.0,), tuple(atoms), tuple(masses))

    # ------------------------------------------------------------------
    # queries
    # ------------------------------------------------------------------

    @property
    def a(self) -> float:
        return self.breaks[0]

    @property
    def b(self) -> float:
        return self.breaks[-1]

    @property
    def interval(self) -> Interval:
        return Interval(self.a, self.b)

    def knots(self) -> np.ndarray:
        return merged_knots(self.breaks, self.atoms)

    def density_on_open(self, c: float, d: float) -> float:
        """Density on an open cell (c, d) that does not straddle a breakpoint."""
        idx = int(np.searchsorted(self.breaks, c, side='right')) - 1
        idx = min(max(idx, 0), len(self.density) - 1)
        return self.density[idx]

    def atom_mass_at(self, s: float) -> float:
        if not self.atoms:
            return 0.0
        idx = int(np.searchsorted(self.atoms, s, side='left'))
        if idx < len(self.atoms) and self.atoms[idx] == s:
            return self.masses[idx]
        return 0.0

    def total_mass(self) -> float:
        return mass(self, EndpointedInterval.open(self.a, self.b))

    def reflected(self) -> 'Measure':
        """lambda~(E) = lambda(-E) on (-b, -a)."""
        return Measure(
            breaks=tuple(-t for t in reversed(self.breaks)),
            density=tuple(reversed(self.density)),
            atoms=tuple(-s for s in reversed(self.atoms)),
            masses=tuple(reversed(self.masses)),
        )


def _check_inside(m: Measure, e: EndpointedInterval) -> None:
    if e.left < m.a or e.right > m.b:
        raise DomainError(f"Interval {e.describe()} is not contained in ({m.a}, {m.b})")
    if (e.left == m.a and e.left_closed) or (e.right == m.b and e.right_closed):
        raise DomainError(f"Interval {e.describe()} reaches a closed endpoint of ({m.a}, {m.b})")


def mass(m: Measure, e: EndpointedInterval) -> float:
    """m(e): atoms inside e by closure flags plus the density integral over e."""
    _check_inside(m, e)
    if e.is_empty:
        return 0.0

    total = 0.0
    for s, atom in zip(m.atoms, m.masses):
        if e.contains(s):
            total += atom

    for c, d, rate in zip(m.breaks[:-1], m.breaks[1:], m.density):
        if rate == 0:
            continue
        lo, hi = max(c, e.left), min(d, e.right)
        if hi > lo:
            total += rate * (hi - lo)
    return total


# ============================================================================
# CUMULATIVE NORMS
# ============================================================================

_POINTS = ('closed', 'open', 'limit')


def _cell_data(u: 'StepFunction', m: Measure) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Merged knots, per-cell u value and density, per-knot u value and atom mass."""
    if u.a != m.a or u.b != m.b:
        raise DomainError(f"Weight on ({u.a}, {u.b}) does not match measure on ({m.a}, {m.b})")
    knots = merged_knots(m.knots(), u.knots())
    left_ends, right_ends = knots[:-1], knots[1:]
    cell_u = np.array([u.value_on_open(c, d) for c, d in zip(left_ends, right_ends)])
    cell_rate = np.array([m.density_on_open(c, d) for c, d in zip(left_ends, right_ends)])
    knot_u = np.array([u.value(s) for s in knots])
    knot_mass = np.array([m.atom_mass_at(s) for s in knots])
    knot_mass[0] = knot_mass[-1] = 0.0
    return knots, cell_u, cell_rate, knot_u, knot_mass


def cumulative_norm(u: 'StepFunction', q: float, m: Measure, side: str = 'left',
                    point: str = 'closed') -> 'MonotoneFunction':
    """
    Cumulative weighted norm of u as a MonotoneFunction.

    side='left'  -> t -> ||u||_{q,(a,t],m}   (point='open': (a,t), 'limit': (a,t+])
    side='right' -> t -> ||u||_{q,[t,b),m}   (point='open': (t,b), 'limit': [t-,b))

    For q < inf the function is stored as base**(1/q) with a piecewise-affine
    base; for q = inf the base is the piecewise-constant essential supremum.
    """
    from stieltjes import MonotoneFunction

    if side not in ('left', 'right'):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    if point not in _POINTS:
        raise DomainError(f"point must be one of {_POINTS}, got {point!r}")

    knots, cell_u, cell_rate, knot_u, knot_mass = _cell_data(u, m)
    n = len(knots) - 1
    lengths = np.diff(knots)

    if math.isinf(q):
        left, closed, right = _ess_sup_cumulative(cell_u, cell_rate, lengths, knot_u, knot_mass, side)
        slope = np.zeros(n)
        power = 1.0
    else:
        cell_rate_q = np.where(cell_rate > 0, ext_pow_array(cell_u, q) * cell_rate, 0.0)
        with np.errstate(invalid='ignore'):
            cell_incr = np.where(cell_rate_q > 0, cell_rate_q * lengths, 0.0)
        atom_incr = np.where(knot_mass > 0, ext_pow_array(knot_u, q) * knot_mass, 0.0)
        left, closed, right = _integral_cumulative(cell_incr, atom_incr, side)
        slope = cell_rate_q if side == 'left' else -cell_rate_q
        power = 1.0 / q

    if not (np.all(np.isfinite(left[1:])) and np.all(np.isfinite(right[:-1]))):
        raise NonAdmissibleWeight(f"||u||_q is not finite inside ({m.a}, {m.b})")

    if side == 'left':
        at = {'closed': closed, 'open': left, 'limit': right}[point]
    else:
        at = {'closed': closed, 'open': right, 'limit': left}[point]

    anchor = '(a,t' if side == 'left' else '[t,b'
    label = f"||u||_{{{q},{anchor}}}" if point == 'closed' else f"||u||_{{{q},{side}-{point}}}"
    return MonotoneFunction(knots=knots, left=left, at=at, right=right, slope=slope,
                            base_increasing=(side == 'left'), power=power, label=label)


def _integral_cumulative(cell_incr: np.ndarray, atom_incr: np.ndarray,
                         side: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Left limits, closed values and right limits of the integral base at each knot."""
    n = len(cell_incr)
    if side == 'left':
        steps = np.empty(2 * n + 1)
        steps[0::2] = atom_incr
        steps[1::2] = cell_incr
        running = np.cumsum(steps)
        right = running[0::2].copy()
        left = np.concatenate(([0.0], running[1::2]))
        closed = right.copy()
    else:
        steps = np.empty(2 * n + 1)
        steps[0::2] = atom_incr[::-1]
        steps[1::2] = cell_incr[::-1]
        running = np.cumsum(steps)
        left = running[0::2][::-1].copy()
        right = np.concatenate((running[1::2][::-1], [0.0]))
        closed = left.copy()
    left[0] = right[0]
    right[-1] = left[-1]
    closed[0], closed[-1] = right[0], left[-1]
    return left, closed, right


def _ess_sup_cumulative(cell_u: np.ndarray, cell_rate: np.ndarray, lengths: np.ndarray,
                        knot_u: np.ndarray, knot_mass: np.ndarray,
                        side: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Same as _integral_cumulative for the essential supremum (q = inf)."""
    n = len(cell_u)
    cell_sup = np.where((cell_rate > 0) & (lengths > 0), cell_u, 0.0)
    atom_sup = np.where(knot_mass > 0, knot_u, 0.0)
    left = np.zeros(n + 1)
    closed = np.zeros(n + 1)
    right = np.zeros(n + 1)

    if side == 'left':
        right[0] = cell_sup[0]
        for j in range(1, n):
            left[j] = right[j - 1]
            closed[j] = max(left[j], atom_sup[j])
            right[j] = max(closed[j], cell_sup[j])
        left[n] = right[n - 1]
    else:
        left[n] = cell_sup[n - 1]
        following = 0.0
        for j in range(n - 1, 0, -1):
            right[j] = max(cell_sup[j], following)
            closed[j] = max(atom_sup[j], right[j])
            following = closed[j]
        right[0] = max(cell_sup[0], following)
        for j in range(1, n + 1):
            left[j] = right[j - 1]

    left[0] = right[0]
    right[n] = left[n]
    closed[0], closed[n] = right[0], left[n]
    return left, closed, right
