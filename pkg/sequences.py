"""
Discrete Toolkit
================
Weighted sequence norms, discrete Hoelder, almost geometric sequences and the
Leindler-type equivalences

    ||{tau_k sum_{m<=k} a_m}||_q  ~  ||{tau_k a_k}||_q
    ||{tau_k sup_{m<=k} a_m}||_q  ~  ||{tau_k a_k}||_q

for almost geometrically decreasing tau.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from numerics import INF, DomainError, HardyError, ext_div, ext_pow, ext_pow_array, holder_rho, lp_sum


logger = logging.getLogger(__name__)

MODES = ('sum', 'sup')


class NotAlmostGeometric(HardyError):
    """Sequence admits no (K, alpha, L) witness"""


@dataclass(frozen=True)
class WeightedSequence:
    """Terms a_k >= 0 with weights w_k > 0 on the index range start .. start+len-1"""
    terms: Tuple[float, ...]
    weights: Tuple[float, ...]
    start: int = 0

    def __post_init__(self):
        terms = tuple(float(v) for v in self.terms)
        weights = tuple(float(v) for v in self.weights)
        object.__setattr__(self, 'terms', terms)
        object.__setattr__(self, 'weights', weights)
        if len(terms) != len(weights):
            raise DomainError("Terms and weights differ in length")
        if any(math.isnan(v) or v < 0 for v in terms):
            raise DomainError("Sequence terms must be >= 0")
        if any(math.isnan(v) or v <= 0 for v in weights):
            raise DomainError("Sequence weights must be > 0")

    @property
    def stop(self) -> int:
        return self.start + len(self.terms) - 1

    def weighted(self) -> np.ndarray:
        terms = np.asarray(self.terms)
        weights = np.asarray(self.weights)
        with np.errstate(invalid='ignore'):
            return np.where(terms == 0, 0.0, terms * weights)


def lq_norm(s: WeightedSequence, q: float) -> float:
    """(sum |a_k w_k|^q)^(1/q), or sup |a_k w_k| for q = inf."""
    return lp_sum(s.weighted(), q)


def holder_sides(a: Sequence[float], b: Sequence[float], q: float, p: float) -> Tuple[float, float]:
    """
    Both sides of ||{a_k b_k}||_q <= ||{a_k}||_r ||{b_k}||_p with 1/r = (1/q - 1/p)_+.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid='ignore'):
        prod = np.where((a == 0) | (b == 0), 0.0, a * b)
    r = holder_rho(q, p)
    left = lp_sum(prod, q)
    na, nb = lp_sum(a, r), lp_sum(b, p)
    right = 0.0 if (na == 0 or nb == 0) else na * nb
    return left, right


# ============================================================================
# EMBEDDING NORMS
# ============================================================================

def embedding_ratio(a: Sequence[float], W: Sequence[float], U: Sequence[float],
                    p: float, q: float) -> float:
    """||{a_k W_k}||_p / ||{a_k U_k}||_q with 0/0 = 0."""
    a = np.asarray(a, dtype=float)
    top = lp_sum(np.where(a == 0, 0.0, a * np.asarray(W, dtype=float)), p)
    bottom = lp_sum(np.where(a == 0, 0.0, a * np.asarray(U, dtype=float)), q)
    return ext_div(top, bottom)


def embedding_norm(W: Sequence[float], U: Sequence[float], p: float, q: float) -> Tuple[float, np.ndarray]:
    """
    Best constant c in ||{a_k W_k}||_p <= c ||{a_k U_k}||_q, which is
    ||{W_k / U_k}||_rho with 1/rho = (1/p - 1/q)_+, and a sequence attaining it.

    For q <= p the extremal is the indicator of the first maximizing index; for
    p < q it is the Hoelder equality case a_k = (W_k/U_k)^(rho/q) / U_k.
    """
    W = np.asarray(W, dtype=float)
    U = np.asarray(U, dtype=float)
    if W.shape != U.shape or W.size == 0:
        raise DomainError("embedding_norm needs two non-empty sequences of equal length")
    if np.any(U <= 0):
        raise DomainError("embedding_norm needs U_k > 0")

    v = W / U
    rho = holder_rho(p, q)
    extremal = np.zeros_like(v)
    if math.isinf(rho):
        k = int(np.argmax(v))
        extremal[k] = 1.0
        return float(v[k]), extremal

    value = lp_sum(v, rho)
    exponent = 0.0 if math.isinf(q) else rho / q
    extremal = np.where(v > 0, ext_pow_array(v, exponent) / U, 0.0)
    return value, extremal


# ============================================================================
# ALMOST GEOMETRIC SEQUENCES
# ============================================================================

@dataclass(frozen=True)
class GeomDecay:
    """
    tau_{k+1} <= K tau_k and alpha tau_k <= tau_{k-L} for all admissible k
    (the increasing variant is the same statement for 1/tau).
    """
    K: float
    alpha: float
    L: int

    def __post_init__(self):
        if self.K < 1 or not self.alpha > 1 or self.L < 1:
            raise DomainError(f"Invalid witness K={self.K}, alpha={self.alpha}, L={self.L}")


def _oriented(s: Sequence[float], direction: str) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    if direction not in ('decreasing', 'increasing'):
        raise DomainError(f"direction must be 'decreasing' or 'increasing', got {direction!r}")
    if np.any(~(s > 0)) or np.any(np.isinf(s)):
        raise DomainError("Almost geometric detection needs finite positive terms")
    return s if direction == 'decreasing' else 1.0 / s


def geom_ratio(s: Sequence[float], L: int, direction: str = 'decreasing') -> float:
    """Largest alpha with alpha tau_k <= tau_{k-L} over the range (inf if vacuous)."""
    tau = _oriented(s, direction)
    if L >= len(tau):
        return INF
    return float(np.min(tau[:-L] / tau[L:]))


def detect_geom(s: Sequence[float], direction: str = 'decreasing') -> Optional[GeomDecay]:
    """Smallest L admitting alpha > 1, with the largest such alpha; None if there is none."""
    tau = _oriented(s, direction)
    if len(tau) < 2:
        return GeomDecay(1.0, INF, 1)
    K = max(1.0, float(np.max(tau[1:] / tau[:-1])))
    for L in range(1, len(tau)):
        alpha = float(np.min(tau[:-L] / tau[L:]))
        if alpha > 1:
            return GeomDecay(K, alpha, L)
    return None


def leindler_constant(K: float, alpha: float, L: int, q: float, mode: str = 'sum') -> float:
    """
    C with lhs <= C rhs, from tau_k <= K^(L-1) alpha^-floor((k-m)/L) tau_m:
    C = K^(L-1) (L alpha^s / (alpha^s - 1))^(1/s), s = min(q, 1) (sum) or s = q (sup).
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    lead = ext_pow(K, L - 1)
    if mode == 'sup' and math.isinf(q):
        return lead
    s = min(q, 1.0) if mode == 'sum' else q
    if math.isinf(alpha):
        return lead * ext_pow(float(L), 1.0 / s)
    a_s = ext_pow(alpha, s)
    return lead * ext_pow(L * a_s / (a_s - 1.0), 1.0 / s)


def leindler_check(tau: Sequence[float], a: Sequence[float], q: float, mode: str = 'sum') -> Tuple[float, float]:
    """(lhs, rhs) of the Leindler equivalence for almost geometrically decreasing tau."""
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    tau = np.asarray(tau, dtype=float)
    a = np.asarray(a, dtype=float)
    if tau.shape != a.shape:
        raise DomainError("tau and a differ in length")
    if np.any(a < 0):
        raise DomainError("Leindler sequences must be non-negative")
    if detect_geom(tau) is None:
        raise NotAlmostGeometric("tau is not almost geometrically decreasing")

    partial = np.cumsum(a) if mode == 'sum' else np.maximum.accumulate(a)
    lhs = lp_sum(tau * partial, q)
    rhs = lp_sum(tau * a, q)
    return lhs, rhs
