"""
Step Functions and Weighted Norms
=================================
Non-negative piecewise-constant functions on (a, b) and the weighted norms

    ||f||_{p,E,m} = (int_E f^p dm)^(1/p)          0 < p < inf
    ||f||_{inf,E,m} = sup{alpha : m{f >= alpha} > 0}

evaluated exactly for computable measures. Pieces are right-closed
(t_{i-1}, t_i] by default; reflection produces left-closed pieces [t_{i-1}, t_i).
Isolated point values override the piece value at finitely many positions.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from measure import EndpointedInterval, Measure, merged_knots
from numerics import DomainError, ext_mul, ext_pow


CLOSURES = ('right', 'left')


@dataclass(frozen=True)
class StepFunction:
    """Non-negative step function with breaks a = t_0 < ... < t_n = b"""
    breaks: Tuple[float, ...]
    values: Tuple[float, ...]
    closed: str = 'right'
    points: Tuple[Tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        breaks = tuple(float(t) for t in self.breaks)
        values = tuple(float(v) for v in self.values)
        points = tuple(sorted((float(s), float(v)) for s, v in self.points))
        object.__setattr__(self, 'breaks', breaks)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'points', points)

        if self.closed not in CLOSURES:
            raise DomainError(f"closed must be 'right' or 'left', got {self.closed!r}")
        if len(breaks) < 2 or any(t1 <= t0 for t0, t1 in zip(breaks, breaks[1:])):
            raise DomainError(f"Step breakpoints must be strictly increasing: {breaks}")
        if any(math.isnan(t) for t in breaks) or any(math.isinf(t) for t in breaks[1:-1]):
            raise DomainError("Only the endpoints a, b may be infinite")
        if len(values) != len(breaks) - 1:
            raise DomainError(f"Expected {len(breaks) - 1} step values, got {len(values)}")
        for v in values + tuple(v for _, v in points):
            if math.isnan(v) or v < 0 or math.isinf(v):
                raise DomainError(f"Step values must be finite and >= 0, got {v}")
        positions = [s for s, _ in points]
        if any(not breaks[0] < s < breaks[-1] for s in positions):
            raise DomainError("Point values must lie strictly inside (a, b)")
        if len(set(positions)) != len(positions):
            raise DomainError("Point values must have distinct positions")

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @classmethod
    def constant(cls, a: float, b: float, value: float) -> 'StepFunction':
        return cls((a, b), (value,))

    @classmethod
    def indicator(cls, a: float, b: float, left: float, right: float,
                  closed: str = 'right') -> 'StepFunction':
        """chi of (left, right] (or [left, right) when closed='left') on (a, b)."""
        breaks = [a]
        values = []
        if left > a:
            breaks.append(left)
            values.append(0.0)
        breaks.append(right if right < b else b)
        values.append(1.0)
        if right < b:
            breaks.append(b)
            values.append(0.0)
        return cls(tuple(breaks), tuple(values), closed)

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------

    @property
    def a(self) -> float:
        return self.breaks[0]

    @property
    def b(self) -> float:
        return self.breaks[-1]

    def knots(self) -> np.ndarray:
        return merged_knots(self.breaks, [s for s, _ in self.points])

    def _piece(self, t: float) -> int:
        side = 'left' if self.closed == 'right' else 'right'
        idx = int(np.searchsorted(self.breaks, t, side=side)) - 1
        return min(max(idx, 0), len(self.values) - 1)

    def value(self, t: float) -> float:
        for s, v in self.points:
            if s == t:
                return v
        return self.values[self._piece(t)]

    def value_on_open(self, c: float, d: float) -> float:
        """Value on an open cell (c, d) that does not straddle a breakpoint."""
        idx = int(np.searchsorted(self.breaks, c, side='right')) - 1
        return self.values[min(max(idx, 0), len(self.values) - 1)]

    def reflected(self) -> 'StepFunction':
        """h~(x) = h(-x) on (-b, -a); the closure side flips."""
        return StepFunction(
            breaks=tuple(-t for t in reversed(self.breaks)),
            values=tuple(reversed(self.values)),
            closed='left' if self.closed == 'right' else 'right',
            points=tuple((-s, v) for s, v in reversed(self.points)),
        )

    def is_monotone(self, increasing: bool) -> bool:
        knots = self.knots()
        seq = [self.value_on_open(knots[0], knots[1])]
        for s, d in zip(knots[1:-1], knots[2:]):
            seq.append(self.value(s))
            seq.append(self.value_on_open(s, d))
        diffs = np.diff(seq)
        return bool(np.all(diffs >= 0)) if increasing else bool(np.all(diffs <= 0))


# ============================================================================
# NORMS
# ============================================================================

def _cells_in(e: EndpointedInterval, knots: np.ndarray) -> np.ndarray:
    inner = knots[(knots > e.left) & (knots < e.right)]
    return np.concatenate(([e.left], inner, [e.right]))


def product_norm(fs: Sequence[StepFunction], p: float, e: EndpointedInterval, m: Measure) -> float:
    """||f_1 * ... * f_k||_{p,e,m}, exact for step functions and computable measures."""
    if e.left < m.a or e.right > m.b:
        raise DomainError(f"Interval {e.describe()} is not contained in ({m.a}, {m.b})")
    if e.is_empty:
        return 0.0

    grid = _cells_in(e, merged_knots(m.knots(), *[f.knots() for f in fs]))
    cell_values = []
    cell_weights = []
    for c, d in zip(grid[:-1], grid[1:]):
        rate = m.density_on_open(c, d)
        if rate == 0 or d <= c:
            continue
        prod = 1.0
        for f in fs:
            prod = ext_mul(prod, f.value_on_open(c, d))
        cell_values.append(prod)
        cell_weights.append(rate * (d - c))

    for s, atom in zip(m.atoms, m.masses):
        if not e.contains(s):
            continue
        prod = 1.0
        for f in fs:
            prod = ext_mul(prod, f.value(s))
        cell_values.append(prod)
        cell_weights.append(atom)

    if not cell_values:
        return 0.0
    values = np.asarray(cell_values)
    if math.isinf(p):
        return float(np.max(values))
    weights = np.asarray(cell_weights)
    total = float(np.sum(np.where(values > 0, values ** p * weights, 0.0)))
    return ext_pow(total, 1.0 / p)


def norm(f: StepFunction, p: float, e: EndpointedInterval, m: Measure) -> float:
    """||f||_{p,e,m}."""
    return product_norm([f], p, e, m)


_OPS: Dict[str, Callable[[float, float], float]] = {
    'product': ext_mul,
    'max': max,
}


def pointwise(f: StepFunction, g: StepFunction, op: str) -> StepFunction:
    """Pointwise product or max on the common refinement."""
    if op not in _OPS:
        raise DomainError(f"Unknown pointwise operation {op!r}")
    if (f.a, f.b) != (g.a, g.b):
        raise DomainError("Step functions live on different intervals")
    if f.closed != g.closed:
        raise DomainError("Step functions have different closure sides")

    combine = _OPS[op]
    breaks = merged_knots(f.breaks, g.breaks)
    values = tuple(combine(f.value_on_open(c, d), g.value_on_open(c, d))
                   for c, d in zip(breaks[:-1], breaks[1:]))
    positions = merged_knots([s for s, _ in f.points], [s for s, _ in g.points])
    points = tuple((s, combine(f.value(s), g.value(s))) for s in positions)
    return StepFunction(tuple(breaks), values, f.closed, points)


# ============================================================================
# SUPREMAL OPERATOR
# ============================================================================

def _essential_pieces(g: StepFunction, m: Measure) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Knots, essential value of g on each open cell, and at each knot (0 where m-null)."""
    if (g.a, g.b) != (m.a, m.b):
        raise DomainError(f"Function on ({g.a}, {g.b}) does not match measure on ({m.a}, {m.b})")
    knots = merged_knots(g.knots(), m.knots())
    cell_sup = np.array([
        g.value_on_open(c, d) if m.density_on_open(c, d) > 0 else 0.0
        for c, d in zip(knots[:-1], knots[1:])
    ])
    atom_sup = np.array([g.value(s) if m.atom_mass_at(s) > 0 else 0.0 for s in knots])
    atom_sup[0] = atom_sup[-1] = 0.0
    return knots, cell_sup, atom_sup


def _tail_and_head(g: StepFunction, m: Measure, direction: str) -> Tuple[np.ndarray, np.ndarray]:
    knots, cell_sup, atom_sup = _essential_pieces(g, m)
    n = len(cell_sup)
    out = np.zeros(n)
    if direction == 'tail':
        following = 0.0
        for j in range(n - 1, -1, -1):
            following = max(cell_sup[j], atom_sup[j + 1], following)
            out[j] = following
    elif direction == 'head':
        preceding = 0.0
        for j in range(n):
            preceding = max(preceding, atom_sup[j], cell_sup[j])
            out[j] = preceding
    else:
        raise DomainError(f"direction must be 'tail' or 'head', got {direction!r}")
    return knots, out


def supremal_operator(g: StepFunction, m: Measure, direction: str = 'tail') -> StepFunction:
    """
    x -> ||g||_{inf,(x,b),m} (tail, left-closed pieces) or
    x -> ||g||_{inf,(a,x),m} (head, right-closed pieces), exact.
    """
    knots, out = _tail_and_head(g, m, direction)
    closed = 'left' if direction == 'tail' else 'right'
    return StepFunction(tuple(knots), tuple(out), closed)


def sup_envelope(g: StepFunction, m: Measure, direction: str = 'tail') -> StepFunction:
    """
    Monotone replacement of g with the supremal values on the opposite closure:
    it dominates g off m-null sets without raising ||.||_{inf,(x,b),m} (tail)
    or ||.||_{inf,(a,x),m} (head).
    """
    knots, out = _tail_and_head(g, m, direction)
    closed = 'right' if direction == 'tail' else 'left'
    return StepFunction(tuple(knots), tuple(out), closed)


def supremal_norm(g: StepFunction, u: StepFunction, q: float, nu: Measure, mu: Measure,
                  direction: str = 'tail') -> float:
    """||u(x) ||g||_{inf,S_x,mu}||_{q,(a,b),nu} with S_x = (x,b) (tail) or (a,x) (head)."""
    envelope = supremal_operator(g, mu, direction)
    return product_norm([u, envelope], q, EndpointedInterval.open(nu.a, nu.b), nu)
