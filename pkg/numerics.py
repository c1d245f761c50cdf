"""
Extended Real Arithmetic
========================
Non-negative extended reals with the conventions used throughout the solver:

- 1/(+inf) = 0, 0 * (+inf) = 0, 0/0 = 0
- conjugate exponents for 0 < p <= +inf
- Hoelder exponents 1/rho = (1/p - 1/q)_+
- enclosures [lo, hi] of computed constants

Values are plain floats; +inf is math.inf.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Union

import numpy as np


INF = math.inf

ExtReal = float
Exponent = float


# ============================================================================
# EXCEPTIONS
# ============================================================================

class HardyError(Exception):
    """Root of all solver errors"""


class DomainError(HardyError, ValueError):
    """Input outside the domain of an operation"""


# ============================================================================
# SCALAR CONVENTIONS
# ============================================================================

def as_ext(value: Union[float, int, str]) -> ExtReal:
    """Parse a non-negative extended real ("inf" allowed)."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ('inf', '+inf', 'infinity', '+infinity'):
            return INF
        value = float(text)
    value = float(value)
    if math.isnan(value) or value < 0:
        raise DomainError(f"Expected a non-negative extended real, got {value!r}")
    return value


def as_exponent(p: Union[float, int, str]) -> Exponent:
    """Parse an exponent 0 < p <= +inf."""
    value = as_ext(p)
    if value <= 0:
        raise DomainError(f"Exponent must be positive, got {p!r}")
    return value


def ext_mul(a: ExtReal, b: ExtReal) -> ExtReal:
    if a == 0 or b == 0:
        return 0.0
    return a * b


def ext_div(a: ExtReal, b: ExtReal) -> ExtReal:
    """a / b with 0/0 = 0, a/0 = +inf for a > 0 and a/inf = 0 for finite a."""
    if a == 0:
        return 0.0
    if b == 0:
        return INF
    if math.isinf(b):
        return INF if math.isinf(a) else 0.0
    return a / b


def ext_pow(a: ExtReal, s: float) -> ExtReal:
    """a**s on [0, +inf] for any real s, with 0**(-s) = inf and inf**(-s) = 0."""
    if s == 0:
        return 1.0
    if a == 0:
        return 0.0 if s > 0 else INF
    if math.isinf(a):
        return INF if s > 0 else 0.0
    try:
        return a ** s
    except OverflowError:
        return INF


def ext_root(a: ExtReal, p: Exponent) -> ExtReal:
    """a**(1/p); for p = inf this is the indicator of a > 0."""
    if math.isinf(p):
        return 1.0 if a > 0 else 0.0
    return ext_pow(a, 1.0 / p)


def ext_div_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise ext_div."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        out = a / b
    out = np.where(b == 0, INF, out)
    out = np.where(np.isinf(b) & np.isfinite(a), 0.0, out)
    return np.where(a == 0, 0.0, out)


def ext_mul_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise ext_mul."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid='ignore'):
        out = a * b
    return np.where((a == 0) | (b == 0), 0.0, out)


def ext_pow_array(a: np.ndarray, s: float) -> np.ndarray:
    """Elementwise ext_pow."""
    a = np.asarray(a, dtype=float)
    if s == 0:
        return np.ones_like(a)
    with np.errstate(divide='ignore', over='ignore'):
        out = np.power(a, s)
    if s < 0:
        out = np.where(a == 0, INF, out)
    return out


# ============================================================================
# EXPONENT UTILITIES
# ============================================================================

def conjugate(p: Exponent) -> Exponent:
    """Conjugate exponent p' for 0 < p <= +inf."""
    p = as_exponent(p)
    if math.isinf(p):
        return 1.0
    if p == 1:
        return INF
    if p < 1:
        return p / (1.0 - p)
    return p / (p - 1.0)


def inverse(p: Exponent) -> float:
    """1/p with 1/inf = 0."""
    return 0.0 if math.isinf(p) else 1.0 / p


def holder_rho(p: Exponent, q: Exponent) -> Exponent:
    """rho with 1/rho = (1/p - 1/q)_+; +inf when q <= p."""
    p = as_exponent(p)
    q = as_exponent(q)
    gap = inverse(p) - inverse(q)
    if gap <= 0:
        return INF
    return 1.0 / gap


def lp_sum(values: np.ndarray, p: Exponent) -> ExtReal:
    """(sum v^p)^(1/p), or max for p = inf, over non-negative values."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.max(values))
    if np.any(np.isinf(values)):
        return INF
    total = float(np.sum(ext_pow_array(values, p)))
    return ext_pow(total, 1.0 / p)


# ============================================================================
# ENCLOSURES
# ============================================================================

@dataclass(frozen=True)
class Enclosure:
    """Certified bracket [lo, hi] of a non-negative quantity"""
    lo: ExtReal
    hi: ExtReal

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise DomainError("Enclosure bounds must not be NaN")
        if self.lo > self.hi:
            raise DomainError(f"Malformed enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, value: ExtReal, slack: float = 0.0) -> 'Enclosure':
        """Enclosure of a value computed in closed form, widened by a relative slack."""
        if math.isinf(value):
            return cls(INF, INF)
        return cls(max(0.0, value * (1.0 - slack)), value * (1.0 + slack))

    @classmethod
    def infinite(cls) -> 'Enclosure':
        return cls(INF, INF)

    @property
    def width(self) -> float:
        if math.isinf(self.hi):
            return 0.0 if math.isinf(self.lo) else INF
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        if math.isinf(self.hi):
            return self.hi
        return 0.5 * (self.lo + self.hi)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.lo)

    def contains(self, value: ExtReal) -> bool:
        return self.lo <= value <= self.hi

    def overlaps(self, other: 'Enclosure') -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other: 'Enclosure') -> 'Enclosure':
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    def power(self, s: float) -> 'Enclosure':
        """Image under x -> x**s for s > 0 (monotone)."""
        if s <= 0:
            raise DomainError("Enclosure.power needs a positive exponent")
        return Enclosure(ext_pow(self.lo, s), ext_pow(self.hi, s))

    def widen(self, slack: float) -> 'Enclosure':
        lo = self.lo if math.isinf(self.lo) else max(0.0, self.lo * (1.0 - slack))
        hi = self.hi if math.isinf(self.hi) else self.hi * (1.0 + slack)
        return Enclosure(lo, hi)

    def to_dict(self) -> Dict[str, Any]:
        return {'lo': encode_ext(self.lo), 'hi': encode_ext(self.hi)}


def encode_ext(value: float) -> Union[float, str]:
    """JSON-friendly form of an extended real."""
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return float(value)
