"""Unequal prior odds: Bayes-adjusted competence and usage advice.

When one alternative is more likely a priori, raw competence is no longer
the quantity that decides whether voting helps.  What matters is the
posterior probability that an agent's vote picks the true alternative,
obtained from competence and the prior through Bayes' rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .core import (
    SIMPLE_MAJORITY,
    DomainError,
    VotePolicy,
    _check_probability,
    consensus_probability,
)

__all__ = [
    "DecisionPrior",
    "Advice",
    "ConsensusAdvice",
    "bayes_adjusted_competence",
    "consensus_advice",
    "consensus_probability_with_priors",
]


@dataclass(frozen=True)
class DecisionPrior:
    """Prior probability that the first alternative is the true one."""

    p_state: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "p_state", _check_probability(self.p_state, "prior p_state")
        )


class Advice(str, Enum):
    USE = "USE"
    INDIFFERENT = "INDIFFERENT"
    DO_NOT_USE = "DO_NOT_USE"


@dataclass(frozen=True)
class ConsensusAdvice:
    verdict: Advice
    adjusted_competence: float
    margin: float


def bayes_adjusted_competence(competence: float, prior: DecisionPrior) -> float:
    """Posterior that a vote for the favoured alternative is right.

    p_adj = p * s / (p * s + (1 - p) * (1 - s)) with competence p and prior
    s.  Equals 1/2 exactly when p + s = 1; the complementary alternative's
    figure is obtained by passing the complementary prior.
    """
    p = _check_probability(competence, "competence")
    s = prior.p_state
    num = p * s
    return num / (num + (1.0 - p) * (1.0 - s))


def consensus_advice(
    competence: float, prior: DecisionPrior, tolerance: float = 1e-12
) -> ConsensusAdvice:
    """Should majority voting be used at all under this prior?

    The sign of p + s - 1 decides: positive means the adjusted competence
    clears 1/2 and larger groups help, negative means they actively hurt,
    and within ``tolerance`` of zero the group size is irrelevant.
    """
    p = _check_probability(competence, "competence")
    if not (tolerance >= 0.0) or math.isnan(tolerance):
        raise DomainError(f"tolerance must be >= 0, got {tolerance!r}")
    margin = p + prior.p_state - 1.0
    adjusted = bayes_adjusted_competence(p, prior)
    if abs(margin) <= tolerance:
        verdict = Advice.INDIFFERENT
    elif margin > 0.0:
        verdict = Advice.USE
    else:
        verdict = Advice.DO_NOT_USE
    return ConsensusAdvice(verdict=verdict, adjusted_competence=adjusted, margin=margin)


def consensus_probability_with_priors(
    n: int,
    competence: float,
    prior: DecisionPrior,
    policy: VotePolicy = SIMPLE_MAJORITY,
) -> float:
    """Consensus-correctness tail evaluated at the Bayes-adjusted competence."""
    adjusted = bayes_adjusted_competence(competence, prior)
    return consensus_probability(n, adjusted, policy)
