"""
Hardy Constants CLI
===================
Batch front door: reads a JSON problem file, runs the requested computation and
prints a JSON report on stdout (human summary on stderr).

    hardy constants  problem.json      regime, A/B enclosures, vanishing verdict
    hardy discretize problem.json      discretizing sequence and invariant check
    hardy oracle     problem.json      brute-force lower bound for c with witness
    hardy verify     problem.json      constants + oracle + equivalence ratios
    hardy reduce     problem.json      three-measure problem -> two-measure problem

Exit codes: 0 ok, 1 invalid problem, 2 inequality fails, 3 numerical failure.
"""

import json
import logging
import math
import sys
from functools import wraps
from typing import Any, Dict, Optional, Tuple

import click

from characterize import (
    Direction, NotAbsolutelyContinuous, ProblemSpec, compute_report, problem_sequence, reduce_three_measure,
    reflect,
)
from configs.solver_config import EQUIVALENCE_BOUNDS, EXIT_CODES, SOLVER_DEFAULTS
from discretize import TruncationOverflow, check_invariants, phi_function, to_frame
from measure import Measure, NonAdmissibleWeight
from numerics import DomainError, HardyError, encode_ext
from oracle import best_constant_estimate
from stepfn import StepFunction
from stieltjes import ToleranceNotMet


logger = logging.getLogger(__name__)

NUMERICAL_ERRORS = (ToleranceNotMet, TruncationOverflow)


# ============================================================================
# PROBLEM FILES
# ============================================================================

def _real(value: Any) -> float:
    """Signed real; "inf" / "-inf" strings allowed."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ('inf', '+inf', 'infinity'):
            return math.inf
        if text in ('-inf', '-infinity'):
            return -math.inf
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise DomainError(f"Expected a number, got {value!r}")
    if math.isnan(out):
        raise DomainError("NaN is not allowed in problem files")
    return out


def _parse_measure(doc: Dict[str, Any], a: float, b: float) -> Measure:
    density = doc.get('density') or {'breaks': [a, b], 'values': [0.0]}
    atoms = doc.get('atoms', [])
    return Measure(
        breaks=tuple(_real(t) for t in density['breaks']),
        density=tuple(_real(v) for v in density['values']),
        atoms=tuple(_real(s) for s, _ in atoms),
        masses=tuple(_real(m) for _, m in atoms),
    )


def _parse_step(doc: Dict[str, Any]) -> StepFunction:
    return StepFunction(
        breaks=tuple(_real(t) for t in doc['breaks']),
        values=tuple(_real(v) for v in doc['values']),
        closed=doc.get('closed', 'right'),
        points=tuple((_real(s), _real(v)) for s, v in doc.get('points', [])),
    )


def parse_problem(doc: Dict[str, Any]) -> Tuple[ProblemSpec, Dict[str, Any]]:
    """ProblemSpec plus the run settings found in the document."""
    try:
        a, b = (_real(t) for t in doc['interval'])
        spec = ProblemSpec(
            a=a,
            b=b,
            p=doc['p'],
            q=doc['q'],
            direction=doc.get('direction', 'forward'),
            mu=_parse_measure(doc['mu'], a, b),
            nu=_parse_measure(doc['nu'], a, b),
            u=_parse_step(doc['u']),
            w=_parse_step(doc['w']) if 'w' in doc else None,
            lam=_parse_measure(doc['lambda'], a, b) if 'lambda' in doc else None,
        )
    except KeyError as exc:
        raise DomainError(f"Problem file is missing {exc}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, HardyError):
            raise
        raise DomainError(f"Malformed problem file: {exc}")

    oracle = doc.get('oracle', {})
    settings = {
        'tol': doc.get('tol'),
        'grid': oracle.get('grid'),
        'samples': oracle.get('samples'),
        'seed': doc.get('seed'),
        'max_terms': doc.get('max_terms'),
    }
    return spec, {k: v for k, v in settings.items() if v is not None}


def load_problem(path: str) -> Tuple[ProblemSpec, Dict[str, Any]]:
    try:
        with open(path) as handle:
            doc = json.load(handle)
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path} is not valid JSON: {exc}")
    return parse_problem(doc)


def _measure_doc(m: Measure) -> Dict[str, Any]:
    return {
        'atoms': [[s, mass] for s, mass in zip(m.atoms, m.masses)],
        'density': {'breaks': [encode_ext(t) for t in m.breaks], 'values': list(m.density)},
    }


def _step_doc(f: StepFunction) -> Dict[str, Any]:
    doc = {'breaks': [encode_ext(t) for t in f.breaks], 'values': list(f.values)}
    if f.closed != 'right':
        doc['closed'] = f.closed
    if f.points:
        doc['points'] = [[s, v] for s, v in f.points]
    return doc


def problem_to_dict(spec: ProblemSpec, settings: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Problem document; a lambda payload is written as-is."""
    doc = {
        'interval': [encode_ext(spec.a), encode_ext(spec.b)],
        'p': encode_ext(spec.p),
        'q': encode_ext(spec.q),
        'direction': spec.direction.value,
        'mu': _measure_doc(spec.mu),
        'nu': _measure_doc(spec.nu),
        'u': _step_doc(spec.u),
    }
    if spec.w is not None:
        doc['w'] = _step_doc(spec.w)
    if spec.lam is not None:
        doc['lambda'] = _measure_doc(spec.lam)
    settings = settings or {}
    for key in ('tol', 'seed', 'max_terms'):
        if key in settings:
            doc[key] = settings[key]
    oracle = {k: settings[k] for k in ('grid', 'samples') if k in settings}
    if oracle:
        doc['oracle'] = oracle
    return doc


# ============================================================================
# OUTPUT
# ============================================================================

def _configure_logging(verbose: bool, json_only: bool) -> None:
    level = logging.DEBUG if verbose else (logging.ERROR if json_only else logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level, format='%(levelname)s %(name)s: %(message)s', force=True)


def _emit(report: Dict[str, Any], summary: str, json_only: bool) -> None:
    click.echo(json.dumps(report, sort_keys=True, indent=2, allow_nan=False))
    if not json_only:
        click.echo(summary, err=True)


def _settings(file_settings: Dict[str, Any], **flags) -> Dict[str, Any]:
    merged = {k: SOLVER_DEFAULTS[k] for k in ('tol', 'grid', 'samples', 'seed', 'max_terms')}
    merged.update(file_settings)
    merged.update({k: v for k, v in flags.items() if v is not None})
    return merged


def common_options(command):
    """Flags shared by every subcommand; problem file values sit between defaults and flags."""
    @click.argument('problem', type=click.Path(exists=True, dir_okay=False))
    @click.option('--tol', type=float, default=None, help='Relative enclosure width target.')
    @click.option('--grid', type=int, default=None, help='Oracle grid resolution.')
    @click.option('--samples', type=int, default=None, help='Oracle random samples.')
    @click.option('--seed', type=int, default=None, help='Oracle master seed.')
    @click.option('--max-terms', 'max_terms', type=int, default=None, help='Discretizing sequence length cap.')
    @click.option('--json-only', is_flag=True, help='Only the JSON report, no summary.')
    @click.option('--verbose', is_flag=True, help='Debug logging on stderr.')
    @wraps(command)
    def wrapper(problem, tol, grid, samples, seed, max_terms, json_only, verbose):
        _configure_logging(verbose, json_only)
        try:
            spec, file_settings = load_problem(problem)
        except (HardyError, OSError) as exc:
            click.echo(f"Invalid problem: {exc}", err=True)
            sys.exit(EXIT_CODES['INVALID_SPEC'])
        settings = _settings(file_settings, tol=tol, grid=grid, samples=samples, seed=seed, max_terms=max_terms)
        try:
            code = command(spec, settings, json_only)
        except NUMERICAL_ERRORS as exc:
            click.echo(f"Numerical failure: {exc}", err=True)
            sys.exit(EXIT_CODES['NUMERICAL_FAILURE'])
        except (NotAbsolutelyContinuous, NonAdmissibleWeight, DomainError) as exc:
            click.echo(f"Invalid problem: {exc}", err=True)
            sys.exit(EXIT_CODES['INVALID_SPEC'])
        sys.exit(code)
    return wrapper


def _report_exit(report) -> int:
    if report.numerical_failure:
        return EXIT_CODES['NUMERICAL_FAILURE']
    if not report.finite:
        return EXIT_CODES['INEQUALITY_FAILS']
    return EXIT_CODES['OK']


def _constants_summary(report) -> str:
    lines = [f"Regime: {report.regime.value} ({report.direction.value})"]
    for name, enc in sorted(report.constants.items()):
        lines.append(f"  {name:<12} [{enc.lo:.12g}, {enc.hi:.12g}]")
    lines.append(f"Vanishing condition: {report.vanishing.value}")
    lines.append("Inequality holds" if report.finite else "Inequality fails (constant infinite)")
    for warning in report.warnings:
        lines.append(f"Warning: {warning}")
    return '\n'.join(lines)


# ============================================================================
# COMMANDS
# ============================================================================

@click.group()
def hardy():
    """Constants of reverse Hardy-type inequalities with supremal operators."""


@hardy.command()
@common_options
def constants(spec: ProblemSpec, settings: Dict[str, Any], json_only: bool) -> int:
    """Regime, characterization constants and vanishing verdict."""
    report = compute_report(spec, settings['tol'], settings['max_terms'])
    _emit(report.to_dict(), _constants_summary(report), json_only)
    return _report_exit(report)


@hardy.command()
@common_options
def discretize(spec: ProblemSpec, settings: Dict[str, Any], json_only: bool) -> int:
    """Discretizing sequence of ||u||_{q,(a,t+],nu} with the invariant check."""
    forward = spec if spec.direction is Direction.FORWARD else reflect(spec)
    d = problem_sequence(forward, settings['max_terms'])
    invariants = check_invariants(phi_function(forward.u, forward.q, forward.nu), d)
    frame = to_frame(d)
    report = {
        'direction': spec.direction.value,
        'reflected': spec.direction is Direction.DUAL,
        'N': d.N,
        'M': d.M,
        'certificate': {k: encode_ext(v) if isinstance(v, float) else v for k, v in d.certificate().items()},
        'sequence': [{k: encode_ext(v) if isinstance(v, float) else v for k, v in row.items()}
                     for row in frame.to_dict(orient='records')],
        'invariants': {'ok': invariants.ok, 'failures': invariants.failures},
    }
    summary = f"{len(d.points)} points, N={d.N}, M={d.M}, invariants {'ok' if invariants.ok else 'FAILED'}"
    _emit(report, summary, json_only)
    return EXIT_CODES['OK'] if invariants.ok else EXIT_CODES['NUMERICAL_FAILURE']


@hardy.command()
@common_options
def oracle(spec: ProblemSpec, settings: Dict[str, Any], json_only: bool) -> int:
    """Brute-force lower bound for the best constant."""
    result = best_constant_estimate(spec, settings['grid'], settings['samples'], settings['seed'],
                                    settings['max_terms'])
    _emit({'oracle': result.to_dict()}, f"c_lower = {result.c_lower:.12g} ({result.strategy})", json_only)
    return EXIT_CODES['INEQUALITY_FAILS'] if math.isinf(result.c_lower) else EXIT_CODES['OK']


@hardy.command()
@common_options
def verify(spec: ProblemSpec, settings: Dict[str, Any], json_only: bool) -> int:
    """Constants and oracle together, with the equivalence ratios."""
    report = compute_report(spec, settings['tol'], settings['max_terms'])
    result = best_constant_estimate(spec, settings['grid'], settings['samples'], settings['seed'],
                                    settings['max_terms'])
    out = report.to_dict()
    out['oracle'] = result.to_dict()
    prefix = 'A' if spec.direction is Direction.FORWARD else 'B'
    ratios = dict(out['ratios'])
    if prefix in report.constants:
        ratios[f'c_lower/{prefix}'] = encode_ext(_safe_ratio(result.c_lower, report.constants[prefix].midpoint))
    for name, enc in report.constants.items():
        if name != prefix:
            ratios[f'c_lower/{name}'] = encode_ext(_safe_ratio(result.c_lower, enc.hi))
    out['ratios'] = dict(sorted(ratios.items()))
    out['bounds'] = dict(EQUIVALENCE_BOUNDS)
    summary = _constants_summary(report) + f"\nOracle c_lower = {result.c_lower:.12g} ({result.strategy})"
    _emit(out, summary, json_only)
    return _report_exit(report)


def _safe_ratio(top: float, bottom: float) -> float:
    if top == 0:
        return 0.0
    if bottom == 0 or math.isinf(top) and math.isinf(bottom):
        return math.inf
    return top / bottom


@hardy.command()
@common_options
def reduce(spec: ProblemSpec, settings: Dict[str, Any], json_only: bool) -> int:
    """Replace lambda by w = (dlambda/dmu)^(1/p) and print the two-measure problem."""
    if spec.lam is None:
        raise DomainError("reduce needs a problem with a lambda measure")
    w = reduce_three_measure(spec.lam, spec.mu, spec.p)
    reduced = ProblemSpec(spec.a, spec.b, spec.p, spec.q, spec.direction, spec.mu, spec.nu, spec.u, w=w)
    _emit(problem_to_dict(reduced, settings), f"Reduced lambda to w with {len(w.values)} pieces", json_only)
    return EXIT_CODES['OK']


if __name__ == '__main__':
    hardy()
