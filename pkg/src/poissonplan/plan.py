"""Sample-size planning for estimating a Poisson mean.

The closed-form rule: n samples guarantee

    Pr{ |mean - lam| < epsilon_a  or  |mean - lam| < epsilon_r*lam } > 1 - delta

for every lam > 0 provided

    n > (epsilon_r/epsilon_a) * ln(2/delta) / ((1+epsilon_r)ln(1+epsilon_r) - epsilon_r).

Equivalently, in log space, n is sufficient iff n * g_c < ln(delta/2) where
g_c = g(epsilon_a, epsilon_a/epsilon_r) is the critical exponent at the
boundary between the absolute- and relative-tolerance regimes.

The closed form is conservative; ``min_sample_size_exact`` searches for the
smallest n whose *exact* coverage clears 1 - delta on an explicit grid of
means, and ``normal_approx_sample_size`` provides the textbook
normal-approximation baseline for comparison.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .bounds import _h
from .budget import CaseLabel, ErrorBudget, case_of  # noqa: F401  (re-exported surface)
from .errors import ParameterError
from .exact import CoveragePoint, exact_coverage

# Relative snap width for the integer tie rule: a right-hand side this close
# to an integer is treated as exactly that integer (and bumped by one).
_TIE_REL = 1e-9


@dataclass(frozen=True)
class PlanResult:
    """A computed sample size.

    n:                 the integer sample size.
    rhs:               real value of the sizing formula's right-hand side
                       (for the normal baseline: z^2*lam/epsilon_a^2).
    critical_exponent: g(epsilon_a, epsilon_a/epsilon_r); None for the
                       normal baseline, which has no relative tolerance.
    method:            "formula", "exact_search", or "normal_approx".
    """

    n: int
    rhs: float
    critical_exponent: Optional[float]
    method: str


def critical_exponent(budget: ErrorBudget) -> float:
    """g(epsilon_a, epsilon_a/epsilon_r), always < 0.

    Evaluated as -(epsilon_a/epsilon_r) * ((1+epsilon_r)ln(1+epsilon_r) -
    epsilon_r) through the cancellation-safe h(), rather than through the
    generic exponent at the divided argument.
    """
    return budget.rel_boundary * _h(budget.epsilon_r)


def _smallest_int_above(x: float, rel_tol: float = _TIE_REL) -> int:
    """Smallest integer strictly greater than x, snapping near-integers up.

    If x is within rel_tol (relative) of an integer m, it is treated as m
    and m + 1 is returned, so ties resolve in the conservative direction
    deterministically.
    """
    nearest = round(x)
    if abs(x - nearest) <= rel_tol * max(1.0, abs(x)):
        return int(nearest) + 1
    return math.floor(x) + 1


def formula_sample_size(budget: ErrorBudget) -> PlanResult:
    """Sample size from the closed-form rule (smallest integer above the rhs)."""
    g_c = critical_exponent(budget)
    rhs = (budget.epsilon_r / budget.epsilon_a) * math.log(2.0 / budget.delta) / (-_h(budget.epsilon_r))
    return PlanResult(
        n=_smallest_int_above(rhs),
        rhs=rhs,
        critical_exponent=g_c,
        method="formula",
    )


def is_sufficient(n: int, budget: ErrorBudget) -> bool:
    """True iff n samples meet the guarantee per the log-space threshold.

    Checks n * g_c < ln(delta/2), the exponential-threshold form of the
    closed-form rule.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParameterError("n", f"n must be a positive integer, got {n!r}")
    return n * critical_exponent(budget) < math.log(budget.delta / 2.0)


def lambda_grid(
    budget: ErrorBudget,
    lam_min: float,
    lam_max: float,
    points: int,
) -> tuple:
    """Log-spaced mean grid over [lam_min, lam_max], plus regime boundaries.

    The boundaries epsilon_a and epsilon_a/epsilon_r (and each perturbed by
    +-1e-6 relative) are added when they fall inside the range, so a scan
    always exercises the regime switches exactly and just off-exactly.
    """
    if not 0.0 < lam_min <= lam_max:
        raise ParameterError(
            "lam_min", f"need 0 < lam_min <= lam_max, got {lam_min!r}, {lam_max!r}"
        )
    if points < 1:
        raise ParameterError("points", f"points must be >= 1, got {points!r}")
    base = np.geomspace(lam_min, lam_max, points).tolist()
    for b in (budget.epsilon_a, budget.rel_boundary):
        for lam in (b * (1.0 - 1e-6), b, b * (1.0 + 1e-6)):
            if lam_min <= lam <= lam_max:
                base.append(lam)
    return tuple(sorted(set(base)))


def default_lambda_grid(budget: ErrorBudget, points: int = 200) -> tuple:
    """The default scan grid: epsilon_a/100 up to 100*epsilon_a/epsilon_r.

    Spans all four tolerance regimes, including both boundaries and their
    +-1e-6 relative perturbations.
    """
    return lambda_grid(budget, budget.epsilon_a / 100.0, 100.0 * budget.rel_boundary, points)


def scan_coverage(
    n: int,
    budget: ErrorBudget,
    grid: Optional[Sequence[float]] = None,
    threads: int = 1,
) -> List[CoveragePoint]:
    """Exact coverage at each grid mean, in grid order.

    Results are identical regardless of ``threads``: points are independent
    and the output preserves input order.
    """
    lams = tuple(default_lambda_grid(budget) if grid is None else grid)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda lam: exact_coverage(n, lam, budget), lams))
    return [exact_coverage(n, lam, budget) for lam in lams]


def min_sample_size_exact(
    budget: ErrorBudget,
    grid: Optional[Sequence[float]] = None,
    n_hint: Optional[int] = None,
) -> PlanResult:
    """Smallest n whose exact coverage reaches 1 - delta at every grid mean.

    Coverage oscillates with n (the feasible set can have holes just above
    its lower edge), so after establishing a feasible upper bound from
    ``n_hint`` (default: the closed-form n) the search scans n upward from 1
    and returns the first fully feasible value; every smaller n is thereby
    verified infeasible.  Infeasible n are cheap to reject because the most
    recently failing grid means are re-checked first.  The result is a
    statement about the supplied grid only - means outside it are not
    checked.
    """
    lams = tuple(default_lambda_grid(budget) if grid is None else grid)
    if not lams:
        raise ParameterError("grid", "grid must be non-empty")
    for lam in lams:
        if not lam > 0.0:
            raise ParameterError("grid", f"grid means must be > 0, got {lam!r}")

    target = 1.0 - budget.delta
    order = list(range(len(lams)))

    def ok(n: int) -> bool:
        for pos, idx in enumerate(order):
            if exact_coverage(n, lams[idx], budget).coverage < target:
                order.insert(0, order.pop(pos))
                return False
        return True

    base = formula_sample_size(budget)
    hint = base.n if n_hint is None else n_hint
    if not isinstance(hint, int) or isinstance(hint, bool) or hint < 1:
        raise ParameterError("n_hint", f"n_hint must be a positive integer, got {n_hint!r}")

    if ok(hint):
        hi = hint
    else:
        step = 1
        while True:
            cand = hint + step
            if ok(cand):
                hi = cand
                break
            step *= 2
            if cand > 2**40:
                raise ParameterError("grid", "no feasible sample size found below 2^40")

    for n in range(1, hi):
        if ok(n):
            return PlanResult(n, base.rhs, base.critical_exponent, "exact_search")
    return PlanResult(hi, base.rhs, base.critical_exponent, "exact_search")


# Coefficients of Acklam's rational approximation to the standard normal
# quantile (relative error < 1.15e-9), refined below by one Halley step
# against erfc to push the error near machine precision.
_ACKLAM_A = (
    -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
    1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00,
)
_ACKLAM_B = (
    -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
    6.680131188771972e+01, -1.328068155288572e+01,
)
_ACKLAM_C = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
    -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00,
)
_ACKLAM_D = (
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
    3.754408661907416e+00,
)


def normal_quantile(p: float) -> float:
    """Standard normal quantile; |error| far below the documented 1e-8."""
    if not 0.0 < p < 1.0:
        raise ParameterError("p", f"quantile argument must be in (0, 1), got {p!r}")
    a, b, c, d = _ACKLAM_A, _ACKLAM_B, _ACKLAM_C, _ACKLAM_D
    p_low = 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    elif p <= 1.0 - p_low:
        q = p - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / (
            ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
        )
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    # One Halley refinement using the exact cdf via erfc.
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = err * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def normal_approx_sample_size(
    lambda_assumed: float, epsilon_a: float, delta: float
) -> PlanResult:
    """Textbook baseline: n = ceil(z_{1-delta/2}^2 * lam / epsilon_a^2).

    Uses Var(mean) = lam/n under the Poisson model and an assumed true mean;
    unlike the closed-form rule it carries no worst-case guarantee.
    """
    if not lambda_assumed > 0.0:
        raise ParameterError(
            "lambda_assumed", f"lambda_assumed must be > 0, got {lambda_assumed!r}"
        )
    if not epsilon_a > 0.0:
        raise ParameterError("epsilon_a", f"epsilon_a must be > 0, got {epsilon_a!r}")
    if not 0.0 < delta < 1.0:
        raise ParameterError("delta", f"delta must be in (0, 1), got {delta!r}")
    z = normal_quantile(1.0 - delta / 2.0)
    rhs = z * z * lambda_assumed / (epsilon_a * epsilon_a)
    return PlanResult(
        n=max(1, math.ceil(rhs)),
        rhs=rhs,
        critical_exponent=None,
        method="normal_approx",
    )
