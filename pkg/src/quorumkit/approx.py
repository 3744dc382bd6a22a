"""Closed-form shortcuts for the exact tail, with their error reported.

Two routes: pool a mixed ensemble into one count-weighted competence and
reuse the exact uniform model, or approximate the number of incorrect
votes by a Poisson law when competence is high.  Each result is returned
next to the exact value it stands in for, so callers can see what the
shortcut costs before trusting it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import (
    SIMPLE_MAJORITY,
    DomainError,
    Ensemble,
    VotePolicy,
    _check_probability,
    consensus_probability,
    majority_threshold,
    mixed_consensus_probability,
)

__all__ = [
    "ApproximationReport",
    "pooled_competence",
    "pooled_variance",
    "normal_route_consensus",
    "poisson_consensus_probability",
]


@dataclass(frozen=True)
class ApproximationReport:
    approx_value: float
    exact_value: float
    abs_error: float


def pooled_competence(ensemble: Ensemble) -> float:
    """Count-weighted mean competence of the ensemble."""
    first = ensemble.classes[0].competence
    if all(c.competence == first for c in ensemble.classes):
        # the weighted mean of a constant is that constant; skip the
        # multiply-divide round trip so the identity holds bit for bit
        return first
    total = ensemble.total_count
    return sum(c.count * c.competence for c in ensemble.classes) / total


def pooled_variance(ensemble: Ensemble) -> float:
    """Variance of the pooled per-vote estimate, p(1 - p)/n."""
    p = pooled_competence(ensemble)
    return p * (1.0 - p) / ensemble.total_count


def normal_route_consensus(
    ensemble: Ensemble, policy: VotePolicy = SIMPLE_MAJORITY
) -> ApproximationReport:
    """Collapse the mixture to its pooled competence, then use the exact model.

    Exact (zero error) whenever the ensemble has a single class, since
    pooling is then the identity.
    """
    pooled = pooled_competence(ensemble)
    approx = consensus_probability(ensemble.total_count, pooled, policy)
    exact = mixed_consensus_probability(ensemble, policy)
    return ApproximationReport(
        approx_value=approx, exact_value=exact, abs_error=abs(approx - exact)
    )


def _poisson_cdf(rate: float, k_max: int) -> float:
    """P(Poisson(rate) <= k_max) by the running-product recurrence.

    Switches to log-space accumulation for large rates, where exp(-rate)
    underflows before the recurrence gets going.
    """
    if k_max < 0:
        return 0.0
    if rate <= 700.0:
        term = math.exp(-rate)
        acc = term
        for k in range(1, k_max + 1):
            term *= rate / k
            acc += term
        return min(acc, 1.0)
    # anchor at the largest retained term to keep the scaled sum in range
    k0 = min(int(rate), k_max)
    log_t0 = -rate + k0 * math.log(rate) - math.lgamma(k0 + 1)
    scaled = 1.0
    t = 1.0
    for k in range(k0 + 1, k_max + 1):
        t *= rate / k
        scaled += t
        if t < scaled * 1e-18:
            break
    t = 1.0
    for k in range(k0, 0, -1):
        t *= k / rate
        scaled += t
        if t < scaled * 1e-18:
            break
    log_total = log_t0 + math.log(scaled)
    if log_total < -745.0:
        return 0.0
    return min(math.exp(log_total), 1.0)


def poisson_consensus_probability(
    n: int, competence: float, policy: VotePolicy = SIMPLE_MAJORITY
) -> ApproximationReport:
    """High-competence shortcut: incorrect votes ~ Poisson(n(1 - p)).

    Consensus succeeds when incorrect votes stay at or below n - threshold,
    so the approximation is the Poisson lower tail at that cutoff.  The
    rate models the count of incorrect votes; it shrinks as competence
    rises, which is where the approximation is sharp.
    """
    p = _check_probability(competence, "competence")
    m = majority_threshold(n, policy)
    rate = n * (1.0 - p)
    approx = _poisson_cdf(rate, n - m)
    exact = consensus_probability(n, p, policy)
    return ApproximationReport(
        approx_value=approx, exact_value=exact, abs_error=abs(approx - exact)
    )
