"""Error budgets and the tolerance-regime classifier.

An estimate of a Poisson mean is considered acceptable when it lands within
an absolute tolerance ``epsilon_a`` OR a relative tolerance ``epsilon_r`` of
the truth; ``delta`` is the total probability allowed for missing both.
Which tolerance is the binding one depends on where the true mean sits
relative to the boundaries ``epsilon_a`` and ``epsilon_a / epsilon_r``,
giving four regimes (labelled I-IV below).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ParameterError


@dataclass(frozen=True)
class ErrorBudget:
    """The (epsilon_a, epsilon_r, delta) triple specifying the guarantee.

    epsilon_a: absolute tolerance, > 0.
    epsilon_r: relative tolerance, in (0, 1).
    delta:     allowed failure probability, in (0, 1).
    """

    epsilon_a: float
    epsilon_r: float
    delta: float

    def __post_init__(self):
        if not self.epsilon_a > 0.0:
            raise ParameterError(
                "epsilon_a", f"epsilon_a must be > 0, got {self.epsilon_a!r}"
            )
        if not 0.0 < self.epsilon_r < 1.0:
            raise ParameterError(
                "epsilon_r", f"epsilon_r must be in (0, 1), got {self.epsilon_r!r}"
            )
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(
                "delta", f"delta must be in (0, 1), got {self.delta!r}"
            )

    @property
    def rel_boundary(self) -> float:
        """The mean at which the relative tolerance overtakes the absolute one."""
        return self.epsilon_a / self.epsilon_r


class CaseLabel(str, Enum):
    """Regime of a true mean ``lam`` relative to the tolerance boundaries.

    I:   lam < epsilon_a            (absolute window swallows 0)
    II:  lam = epsilon_a            (absolute window touches 0)
    III: epsilon_a < lam <= epsilon_a/epsilon_r   (absolute tolerance binds)
    IV:  lam > epsilon_a/epsilon_r  (relative tolerance binds)
    """

    I = "I"
    II = "II"
    III = "III"
    IV = "IV"

    def __str__(self) -> str:
        return self.value


def case_of(lam: float, budget: ErrorBudget) -> CaseLabel:
    """Classify ``lam`` into one of the four tolerance regimes.

    The boundary ``lam == epsilon_a/epsilon_r`` belongs to case III.
    """
    if not lam > 0.0:
        raise ParameterError("lam", f"lam must be > 0, got {lam!r}")
    if lam < budget.epsilon_a:
        return CaseLabel.I
    if lam == budget.epsilon_a:
        return CaseLabel.II
    if lam <= budget.rel_boundary:
        return CaseLabel.III
    return CaseLabel.IV
