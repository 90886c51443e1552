"""Exact Poisson probabilities: pmf, cdf, tails, and coverage of the mixed event.

This module is the ground truth the bounds are verified against, so the pmf
is computed in the saddle-point form used by R's dpois (Loader's algorithm):

    pmf(k; theta) = exp(-stirlerr(k) - bd0(k, theta)) / sqrt(2*pi*k)

where stirlerr(k) = lgamma(k+1) - (k+0.5)ln k + k - ln sqrt(2*pi) and
bd0(k, theta) = k*ln(k/theta) + theta - k is evaluated by a cancellation-free
series when k is close to theta.  Unlike exp(-theta + k*ln(theta) -
lgamma(k+1)), no large terms are differenced, so the relative error stays
near machine precision even for theta in the hundreds of thousands.

Series over k are truncated only where this module's own Chernoff bound
certifies the neglected tail mass below 1e-16.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import numpy as np

from .bounds import chernoff_log_bound
from .budget import CaseLabel, ErrorBudget, case_of
from .errors import ParameterError

_LN_SQRT_2PI = 0.9189385332046727
_LOG_CUT = math.log(1e-16)  # certified-negligible tail mass, in log space

# Stirling-series coefficients 1/12, 1/360, 1/1260, 1/1680, 1/1188.
_S0 = 1.0 / 12.0
_S1 = 1.0 / 360.0
_S2 = 1.0 / 1260.0
_S3 = 1.0 / 1680.0
_S4 = 1.0 / 1188.0


def _stirlerr(n: int) -> float:
    """lgamma(n+1) - ((n+0.5)*ln n - n + ln sqrt(2*pi)) for n >= 1."""
    if n < 16:
        return math.lgamma(n + 1) - (n + 0.5) * math.log(n) + n - _LN_SQRT_2PI
    nn = float(n) * float(n)
    if n > 500:
        return (_S0 - _S1 / nn) / n
    if n > 80:
        return (_S0 - (_S1 - _S2 / nn) / nn) / n
    if n > 35:
        return (_S0 - (_S1 - (_S2 - _S3 / nn) / nn) / nn) / n
    return (_S0 - (_S1 - (_S2 - (_S3 - _S4 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, mean: float) -> float:
    """x*ln(x/mean) + mean - x, evaluated without cancellation near x = mean."""
    if abs(x - mean) < 0.1 * (x + mean):
        v = (x - mean) / (x + mean)
        s = (x - mean) * v
        ej = 2.0 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / mean) + mean - x


def _check_theta(theta: float) -> float:
    if not theta > 0.0:
        raise ParameterError("theta", f"theta must be > 0, got {theta!r}")
    return theta


def _check_count(k) -> int:
    if isinstance(k, bool) or k != int(k):
        raise ParameterError("k", f"k must be an integer, got {k!r}")
    k = int(k)
    if k < 0:
        raise ParameterError("k", f"k must be >= 0, got {k!r}")
    return k


def poisson_pmf(theta: float, k: int) -> float:
    """Pr{K = k} for K ~ Poisson(theta)."""
    _check_theta(theta)
    k = _check_count(k)
    if k == 0:
        return math.exp(-theta)
    exponent = -_stirlerr(k) - _bd0(float(k), theta)
    if exponent < -745.0:  # exp underflows; avoid raising on the sqrt scale
        return 0.0
    return math.exp(exponent) / math.sqrt(2.0 * math.pi * k)


def _upper_cut(theta: float) -> int:
    """Smallest practical m > theta with certified Pr{K >= m} < 1e-16."""
    m = int(theta + 10.0 * math.sqrt(theta) + 35.0)
    while chernoff_log_bound(theta, float(m)) >= _LOG_CUT:
        m = int(1.25 * m) + 10
    return m


def _lower_cut(theta: float) -> int:
    """Largest m >= 0 with certified Pr{K <= m} < 1e-16, or -1 if none."""
    if -theta >= _LOG_CUT:  # even Pr{K = 0} = e^{-theta} is not negligible
        return -1
    m = int(theta - 10.0 * math.sqrt(theta) - 35.0)
    while m > 0 and chernoff_log_bound(theta, float(m)) >= _LOG_CUT:
        m = int(0.8 * m) - 10
    return max(m, 0)


def _mass_exactish(theta: float, lo: int, hi: int) -> float:
    """fsum of pmf over [lo, hi]; exact compensated summation of saddle-point terms."""
    if hi < lo:
        return 0.0
    return math.fsum(poisson_pmf(theta, i) for i in range(lo, hi + 1))


def poisson_cdf(theta: float, k: int) -> float:
    """Pr{K <= k} for K ~ Poisson(theta); k < 0 returns 0.

    The sum is truncated at the Chernoff-certified point beyond which the
    remaining mass is below 1e-16, then accumulated with math.fsum (exact
    compensated summation), keeping the absolute error within 1e-13.
    """
    _check_theta(theta)
    if isinstance(k, bool) or k != int(k):
        raise ParameterError("k", f"k must be an integer, got {k!r}")
    k = int(k)
    if k < 0:
        return 0.0
    total = _mass_exactish(theta, 0, min(k, _upper_cut(theta)))
    return min(total, 1.0)


def exact_tail(theta: float, r: float, side: str) -> float:
    """Pr{K >= r} (side="geq") or Pr{K <= r} (side="leq"), non-strict.

    Computed by direct summation of pmf terms on the tail side, so deep
    tails keep full relative accuracy instead of cancelling against 1.
    Mass beyond the certified 1e-16 truncation point is dropped.
    """
    _check_theta(theta)
    if side == "geq":
        lo = max(0, math.ceil(r))
        return min(_mass_exactish(theta, lo, _upper_cut(theta)), 1.0)
    if side == "leq":
        hi = math.floor(r)
        if hi < 0:
            return 0.0
        return min(_mass_exactish(theta, max(0, _lower_cut(theta) + 1), hi), 1.0)
    raise ParameterError("side", f"side must be 'geq' or 'leq', got {side!r}")


def _window_mass(theta: float, k_lo: int, k_hi: int) -> float:
    """Sum of pmf over the integer window [k_lo, k_hi].

    Anchored at the in-window mode and extended by the ratio recurrence
    pmf(k+1) = pmf(k)*theta/(k+1) via vectorized cumulative products; the
    accumulated drift is bounded by (window width) * 1e-16 in absolute
    terms, which the tests cross-check against the fsum route.
    """
    if k_hi < k_lo:
        return 0.0
    lo = max(k_lo, _lower_cut(theta) + 1)
    hi = min(k_hi, _upper_cut(theta))
    if hi < lo:
        return 0.0  # window lies entirely in certified-negligible tails
    if hi - lo < 64:
        return min(_mass_exactish(theta, lo, hi), 1.0)
    k0 = min(max(int(theta), lo), hi)
    p0 = poisson_pmf(theta, k0)
    if p0 == 0.0:
        return 0.0
    total = 1.0
    if k0 < hi:
        up = theta / np.arange(k0 + 1, hi + 1, dtype=np.float64)
        total += float(np.cumprod(up).sum())
    if k0 > lo:
        down = np.arange(k0, lo, -1, dtype=np.float64) / theta
        total += float(np.cumprod(down).sum())
    return min(p0 * total, 1.0)


def coverage_window(n: int, lam: float, budget: ErrorBudget) -> Tuple[int, int]:
    """Integer counts K satisfying |K/n - lam| < max(epsilon_a, epsilon_r*lam).

    Returns (k_min, k_max), possibly empty as k_min = k_max + 1.  Endpoints
    are resolved in exact rational arithmetic (every finite double is a
    rational), so strict inequalities are honored even when n*(lam -+ w)
    lands exactly on an integer: such counts are excluded.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParameterError("n", f"n must be a positive integer, got {n!r}")
    if not lam > 0.0 or math.isinf(lam):
        raise ParameterError("lam", f"lam must be a positive finite real, got {lam!r}")
    lam_q = Fraction(lam)
    w = max(Fraction(budget.epsilon_a), Fraction(budget.epsilon_r) * lam_q)
    k_min = max(0, math.floor(n * (lam_q - w)) + 1)
    k_max = math.ceil(n * (lam_q + w)) - 1
    return k_min, k_max


@dataclass(frozen=True)
class CoveragePoint:
    """Exact coverage of the mixed-tolerance event at one (n, lam)."""

    lam: float
    n: int
    coverage: float
    k_min: int
    k_max: int
    case: CaseLabel


def exact_coverage(n: int, lam: float, budget: ErrorBudget) -> CoveragePoint:
    """Pr{ |K/n - lam| < epsilon_a  or  |K/n - lam| < epsilon_r*lam }, K ~ Poisson(n*lam).

    The union of the two strict events is the single window of half-width
    max(epsilon_a, epsilon_r*lam); the probability is the pmf mass over the
    integer window from coverage_window, i.e. cdf(k_max) - cdf(k_min - 1).
    """
    k_min, k_max = coverage_window(n, lam, budget)
    coverage = _window_mass(n * lam, k_min, k_max)
    return CoveragePoint(
        lam=lam,
        n=n,
        coverage=coverage,
        k_min=k_min,
        k_max=k_max,
        case=case_of(lam, budget),
    )
