"""
Best Constant Oracle
====================
Brute-force lower bounds for the best constant

    c = sup_g ||g w||_{p,(a,b),mu} / ||u(x) ||g||_{inf,S_x,mu}||_{q,(a,b),nu}

over step test functions. Candidates come from three strategies:

1. extremal  - indicators of the covering intervals, their embedding-extremal
               combination, the vanishing probe chi_(a,x_N] and, for q = inf,
               the exchange candidate 1 / ||u||_{inf,(a,x),nu}
2. random    - non-increasing step functions with log-uniform levels
3. ascent    - coordinate ascent from the best candidate found so far

All grid candidates are scored exactly by a batched evaluator; the winner is
re-scored with the generic ratio so the witness reproduces c_lower.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from characterize import Direction, NotAbsolutelyContinuous, ProblemSpec, problem_sequence, reflect
from configs.solver_config import SOLVER_DEFAULTS
from discretize import DiscretizingSequence, TruncationOverflow, covering_intervals
from measure import EndpointedInterval, cumulative_norm, merged_knots
from numerics import ext_div, ext_div_array, ext_pow_array
from sequences import embedding_norm
from stepfn import StepFunction, norm, product_norm, supremal_norm


logger = logging.getLogger(__name__)

STRATEGIES = ('extremal', 'random', 'ascent')


@dataclass
class OracleResult:
    c_lower: float
    witness: StepFunction
    strategy: str
    grid: int
    seed: int
    table: pd.DataFrame = field(default_factory=pd.DataFrame)

    def to_dict(self) -> Dict[str, object]:
        return {
            'c_lower': 'inf' if math.isinf(self.c_lower) else self.c_lower,
            'strategy': self.strategy,
            'grid': self.grid,
            'seed': self.seed,
            'witness': {
                'breaks': [_encode(t) for t in self.witness.breaks],
                'values': list(self.witness.values),
                'closed': self.witness.closed,
                'points': [list(p) for p in self.witness.points],
            },
            'strategies': self.table.to_dict(orient='records'),
        }


def _encode(t: float):
    if math.isinf(t):
        return 'inf' if t > 0 else '-inf'
    return t


# ============================================================================
# RATIO
# ============================================================================

def ratio(spec: ProblemSpec, g: StepFunction) -> float:
    """||g w||_{p,mu} / ||u(x) ||g||_{inf,S_x,mu}||_{q,nu} with 0/0 = 0."""
    whole = EndpointedInterval.open(spec.a, spec.b)
    if spec.lam is not None:
        top = norm(g, spec.p, whole, spec.lam)
    else:
        top = product_norm([g, spec.w], spec.p, whole, spec.mu)
    direction = 'tail' if spec.direction is Direction.FORWARD else 'head'
    bottom = supremal_norm(g, spec.u, spec.q, spec.nu, spec.mu, direction)
    return ext_div(top, bottom)


# ============================================================================
# CANDIDATES
# ============================================================================

def extremal_candidates(spec: ProblemSpec, d: DiscretizingSequence) -> List[StepFunction]:
    """Embedding-extremal combination of chi_{J_k}, followed by the chi_{J_k} themselves."""
    w = spec.weight()
    intervals = covering_intervals(d)
    indicators = [StepFunction.indicator(spec.a, spec.b, J.left, J.right) for J in intervals]
    W = [norm(w, spec.p, J, spec.mu) for J in intervals]
    U = list(d.phi_values[:-1])
    _, coefficients = embedding_norm(W, U, spec.p, spec.q)

    points = list(d.points)
    values = [float(v) for v in coefficients]
    if points[0] > spec.a:
        points.insert(0, spec.a)
        values.insert(0, 0.0)
    combination = StepFunction(tuple(points), tuple(values))
    return [combination] + indicators


def vanishing_probe(spec: ProblemSpec, d: DiscretizingSequence) -> Optional[StepFunction]:
    """chi_(a,x_N]; its ratio is +inf whenever w charges (a, x_N]."""
    if not d.x_N > spec.a or d.x_N >= spec.b:
        return None
    return StepFunction.indicator(spec.a, spec.b, spec.a, d.x_N)


def exchange_candidate(spec: ProblemSpec) -> Optional[StepFunction]:
    """g = 1 / ||u||_{inf,(a,x),nu} (0 where that vanishes); attains c when q = inf."""
    if not math.isinf(spec.q):
        return None
    G = cumulative_norm(spec.u, math.inf, spec.nu, side='left', point='open')
    levels = G.right[:-1]
    values = tuple(1.0 / v if v > 0 else 0.0 for v in levels)
    return StepFunction(tuple(G.knots), values)


def absolute_continuity_probes(spec: ProblemSpec) -> List[StepFunction]:
    """Indicators of lambda-charged, mu-null sets (ratio +inf)."""
    if spec.lam is None:
        return []
    probes = []
    for s in spec.lam.atoms:
        if spec.mu.atom_mass_at(s) == 0:
            probes.append(StepFunction((spec.a, spec.b), (0.0,), points=((s, 1.0),)))
    breaks = merged_knots(spec.lam.breaks, spec.mu.breaks)
    for c, d in zip(breaks[:-1], breaks[1:]):
        if spec.lam.density_on_open(c, d) > 0 and spec.mu.density_on_open(c, d) == 0:
            probes.append(StepFunction.indicator(spec.a, spec.b, c, d))
    return probes


# ============================================================================
# BATCHED EXACT EVALUATION ON A GRID
# ============================================================================

class GridEvaluator:
    """
    Exact ratios of right-closed step functions on fixed knots, many at once.
    Row i of a batch holds the values of g on the cells (t_i, t_{i+1}].
    """

    def __init__(self, spec: ProblemSpec, knots: np.ndarray):
        self.spec = spec
        self.knots = np.asarray(knots, dtype=float)
        c, d = self.knots[:-1], self.knots[1:]
        lengths = d - c
        w = spec.weight()
        u = spec.u
        mu, nu = spec.mu, spec.nu

        mu_rate = np.array([mu.density_on_open(x, y) for x, y in zip(c, d)])
        nu_rate = np.array([nu.density_on_open(x, y) for x, y in zip(c, d)])
        mu_atom = np.array([mu.atom_mass_at(y) for y in d])
        nu_atom = np.array([nu.atom_mass_at(x) for x in c])
        mu_atom[-1] = 0.0
        nu_atom[0] = 0.0
        w_cell = np.array([w.value_on_open(x, y) for x, y in zip(c, d)])
        u_cell = np.array([u.value_on_open(x, y) for x, y in zip(c, d)])
        w_right = np.array([w.value(y) if m > 0 else 0.0 for y, m in zip(d, mu_atom)])
        u_left = np.array([u.value(x) if m > 0 else 0.0 for x, m in zip(c, nu_atom)])

        with np.errstate(invalid='ignore'):
            mu_len = np.where(mu_rate > 0, mu_rate * lengths, 0.0)
            nu_len = np.where(nu_rate > 0, nu_rate * lengths, 0.0)

        self.charged = (mu_len > 0) | (mu_atom > 0)
        p, q = spec.p, spec.q
        if math.isinf(p):
            self.lhs_weight = np.maximum(np.where(mu_len > 0, w_cell, 0.0), np.where(mu_atom > 0, w_right, 0.0))
        else:
            self.lhs_weight = (np.where(mu_len > 0, ext_pow_array(w_cell, p) * mu_len, 0.0)
                               + np.where(mu_atom > 0, ext_pow_array(w_right, p) * mu_atom, 0.0))
        if math.isinf(q):
            self.rhs_weight = np.maximum(np.where(nu_len > 0, u_cell, 0.0), np.where(nu_atom > 0, u_left, 0.0))
        else:
            self.rhs_weight = (np.where(nu_len > 0, ext_pow_array(u_cell, q) * nu_len, 0.0)
                               + np.where(nu_atom > 0, ext_pow_array(u_left, q) * nu_atom, 0.0))

    @property
    def n_cells(self) -> int:
        return len(self.knots) - 1

    def project(self, g: StepFunction) -> np.ndarray:
        """Cell values of g; exact when g is right-closed with breaks among the knots."""
        return np.array([g.value_on_open(x, y) for x, y in zip(self.knots[:-1], self.knots[1:])])

    def witness(self, row: np.ndarray) -> StepFunction:
        return StepFunction(tuple(self.knots), tuple(float(v) for v in row))

    def ratios(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        p, q = self.spec.p, self.spec.q
        if math.isinf(p):
            lhs = np.max(rows * self.lhs_weight, axis=1)
        else:
            lhs = ext_pow_array(np.sum(ext_pow_array(rows, p) * self.lhs_weight, axis=1), 1.0 / p)

        charged = np.where(self.charged, rows, 0.0)
        suffix = np.maximum.accumulate(charged[:, ::-1], axis=1)[:, ::-1]
        if math.isinf(q):
            rhs = np.max(suffix * self.rhs_weight, axis=1)
        else:
            rhs = ext_pow_array(np.sum(ext_pow_array(suffix, q) * self.rhs_weight, axis=1), 1.0 / q)
        return ext_div_array(lhs, rhs)


def _grid_knots(spec: ProblemSpec, d: Optional[DiscretizingSequence], grid: int) -> np.ndarray:
    natural = merged_knots(spec.u.knots(), spec.weight().knots(), spec.mu.knots(), spec.nu.knots(),
                           d.points if d is not None else ())
    c, e = natural[:-1], natural[1:]
    finite = np.isfinite(e - c)
    span = float(np.sum((e - c)[finite])) if np.any(finite) else 0.0
    pieces = [natural]
    if span > 0:
        for x, y in zip(c[finite], e[finite]):
            count = int(max(1, round(grid * (y - x) / span)))
            if count > 1:
                pieces.append(np.linspace(x, y, count + 1)[1:-1])
    return merged_knots(*pieces)


# ============================================================================
# SEARCH
# ============================================================================

def _random_rows(rng: np.random.Generator, n_rows: int, n_cells: int, spread: float) -> np.ndarray:
    """Non-increasing rows: sorted log-uniform, few-level and prefix-indicator shapes."""
    rows = np.empty((n_rows, n_cells))
    kinds = rng.integers(0, 3, size=n_rows)
    for i, kind in enumerate(kinds):
        if kind == 0:
            rows[i] = np.sort(np.exp2(-rng.uniform(0.0, spread, size=n_cells)))[::-1]
        elif kind == 1:
            cuts = np.sort(rng.integers(0, n_cells + 1, size=rng.integers(1, 5)))
            drops = np.exp2(-np.cumsum(rng.uniform(0.0, spread / 4.0, size=len(cuts))))
            levels = np.concatenate(([1.0], drops))
            rows[i] = levels[np.searchsorted(cuts, np.arange(n_cells), side='right')]
        else:
            cut = int(rng.integers(1, n_cells + 1))
            rows[i] = np.where(np.arange(n_cells) < cut, 1.0, np.exp2(-rng.uniform(0.0, spread)))
    return rows


def _spread(spec: ProblemSpec) -> float:
    values = np.array(list(spec.u.values) + list(spec.weight().values), dtype=float)
    positive = values[values > 0]
    if positive.size == 0:
        return 8.0
    return float(min(60.0, np.log2(positive.max() / positive.min()) + 8.0))


def _random_search(evaluator: GridEvaluator, rng: np.random.Generator, samples: int,
                   spread: float) -> Tuple[float, int, np.ndarray]:
    batch = SOLVER_DEFAULTS['batch_rows']
    best = (-1.0, -1, np.zeros(evaluator.n_cells))
    done = 0
    while done < samples:
        rows = _random_rows(rng, min(batch, samples - done), evaluator.n_cells, spread)
        scores = evaluator.ratios(rows)
        i = int(np.argmax(scores))
        if scores[i] > best[0]:
            best = (float(scores[i]), done + i, rows[i])
        done += len(rows)
    return best


def _ascent(evaluator: GridEvaluator, row: np.ndarray, score: float) -> Tuple[float, np.ndarray]:
    """Prefix and single-cell rescaling moves until no move improves."""
    n = evaluator.n_cells
    positions = np.unique(np.linspace(1, max(n - 1, 1), num=min(64, max(n - 1, 1))).astype(int))
    for _ in range(SOLVER_DEFAULTS['ascent_sweeps']):
        for factor in (2.0, 1.25, 1.05):
            for _ in range(16):
                moves = []
                for i in positions:
                    for scale in (factor, 1.0 / factor):
                        prefix = row.copy()
                        prefix[:i] *= scale
                        moves.append(prefix)
                        single = row.copy()
                        single[i - 1] *= scale
                        moves.append(single)
                moves = np.array(moves)
                scores = evaluator.ratios(moves)
                j = int(np.argmax(scores))
                if not scores[j] > score:
                    break
                score, row = float(scores[j]), moves[j]
    return score, row


def best_constant_estimate(spec: ProblemSpec, grid: Optional[int] = None, samples: Optional[int] = None,
                           seed: Optional[int] = None, max_terms: Optional[int] = None) -> OracleResult:
    """Largest ratio found over the three strategies; deterministic given seed."""
    grid = SOLVER_DEFAULTS['grid'] if grid is None else grid
    samples = SOLVER_DEFAULTS['samples'] if samples is None else samples
    seed = SOLVER_DEFAULTS['seed'] if seed is None else seed

    if spec.direction is Direction.DUAL:
        mirrored = best_constant_estimate(reflect(spec), grid, samples, seed, max_terms)
        witness = mirrored.witness.reflected()
        return OracleResult(ratio(spec, witness), witness, mirrored.strategy, grid, seed, mirrored.table)

    try:
        spec.weight()
    except NotAbsolutelyContinuous as exc:
        logger.warning("Inequality fails: %s", exc)
        probe = absolute_continuity_probes(spec)[0]
        table = pd.DataFrame([{'strategy': 'extremal', 'candidates': 1, 'best_ratio': 'inf'}])
        return OracleResult(ratio(spec, probe), probe, 'extremal', grid, seed, table)

    try:
        d = problem_sequence(spec, max_terms)
    except TruncationOverflow as exc:
        logger.warning("No discretizing sequence, extremal candidates skipped: %s", exc)
        d = None

    extremal: List[StepFunction] = []
    if d is not None:
        probe = vanishing_probe(spec, d)
        if probe is not None:
            extremal.append(probe)
        extremal.extend(extremal_candidates(spec, d))
    exchange = exchange_candidate(spec)
    if exchange is not None:
        extremal.append(exchange)

    evaluator = GridEvaluator(spec, _grid_knots(spec, d, grid))
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(len(STRATEGIES))]
    spread = _spread(spec)

    def run_extremal():
        if not extremal:
            return -1.0, -1, np.zeros(evaluator.n_cells)
        rows = np.array([evaluator.project(g) for g in extremal])
        scores = evaluator.ratios(rows)
        i = int(np.argmax(scores))
        return float(scores[i]), i, rows[i]

    tasks = {
        'extremal': (run_extremal, len(extremal)),
        'random': (lambda: _random_search(evaluator, streams[1], samples, spread), samples),
    }
    found: Dict[str, Tuple[float, int, np.ndarray]] = {}
    with ThreadPoolExecutor(max_workers=SOLVER_DEFAULTS['max_workers']) as executor:
        futures = {executor.submit(fn): name for name, (fn, _) in tasks.items()}
        for future in as_completed(futures):
            found[futures[future]] = future.result()

    order = {name: k for k, name in enumerate(STRATEGIES)}
    ranked = sorted(found.items(), key=lambda item: (-item[1][0], order[item[0]], item[1][1]))
    strategy, (score, _, row) = ranked[0]

    if math.isfinite(score) and score > 0:
        ascended, ascended_row = _ascent(evaluator, row, score)
        found['ascent'] = (ascended, 0, ascended_row)
        if ascended > score:
            strategy, score, row = 'ascent', ascended, ascended_row

    witness = evaluator.witness(row)
    c_lower = ratio(spec, witness)
    table = pd.DataFrame([
        {'strategy': name,
         'candidates': tasks[name][1] if name in tasks else 1,
         'best_ratio': 'inf' if math.isinf(found[name][0]) else max(found[name][0], 0.0)}
        for name in STRATEGIES if name in found
    ])
    logger.info("Oracle: c_lower=%s via %s on %d cells", c_lower, strategy, evaluator.n_cells)
    return OracleResult(c_lower, witness, strategy, grid, seed, table)
