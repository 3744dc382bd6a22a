"""Design-time solvers: pick the group, don't just grade it.

Answers the questions a system designer actually asks: how many agents
reach a target reliability, when does merging a weaker group into a
stronger one start paying off (critical size), and how competent must the
weaker group be for merging to help at every size (critical competence).

A parity note that shapes both critical-value solvers: under the
tie-is-failure rule, a group comparison across parities measures the tie
geometry, not competence pooling.  Appending a single agent to an
odd-sized group provably lowers the correct-consensus tail for any added
competence below 1 (the threshold climbs while only half the new vote
helps), and appending one agent to an even-sized group trivially raises
it by unlocking ties.  Larger odd additions can genuinely help an odd
group, but exact-arithmetic enumeration shows the smallest helpful
addition is even whenever any exists, an even size one step earlier
crossing first.  Both solvers therefore grow the added group in steps of
two, keeping the merged size in the base group's parity class: nothing is
missed for odd bases, and for even bases the step rule deliberately
excludes the free one-agent tie-break, which says nothing about the added
group's competence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._kernels import get_backend
from .core import (
    SIMPLE_MAJORITY,
    AgentClass,
    DomainError,
    Ensemble,
    VotePolicy,
    _check_probability,
    consensus_probability,
    mixed_consensus_probability,
)
from .priors import DecisionPrior, bayes_adjusted_competence

__all__ = [
    "ConvergenceError",
    "PlanResult",
    "SizeVerdict",
    "CriticalSizeResult",
    "plan_agent_count",
    "critical_group_size",
    "critical_competence",
    "subset_dominance",
]

# spot-check budget for the sub-1/2 short-circuit
_NEVER_SAMPLE_CAP = 64


class ConvergenceError(RuntimeError):
    """A solver could not bracket or refine its answer."""


@dataclass(frozen=True)
class PlanResult:
    """Outcome of an agent-count plan; ``required_n`` is None when no
    count within the search bound reaches the target."""

    required_n: int | None
    achieved_value: float | None
    reason: str | None = None

    @property
    def attainable(self) -> bool:
        return self.required_n is not None


class SizeVerdict(str, Enum):
    FOUND = "FOUND"
    NEVER = "NEVER"
    NONE_WITHIN_BOUND = "NONE_WITHIN_BOUND"


@dataclass(frozen=True)
class CriticalSizeResult:
    verdict: SizeVerdict
    b_star: int | None
    search_cap: int
    baseline: float
    achieved_value: float | None


def plan_agent_count(
    competence: float,
    target: float,
    *,
    prior: DecisionPrior | None = None,
    max_n: int = 9999,
    policy: VotePolicy = SIMPLE_MAJORITY,
) -> PlanResult:
    """Smallest odd agent count whose consensus probability meets ``target``.

    Odd counts only: under simple majority an even count spends an agent
    on widening the tie region, so the minimal solution is always odd.
    With a prior, competence is Bayes-adjusted first.  When the effective
    competence is at or below 1/2 and the target exceeds it, no count will
    ever do (a single agent is already the best group).
    """
    p = _check_probability(competence, "competence")
    t = float(target)
    if not (0.0 < t < 1.0) or math.isnan(t):
        raise DomainError(f"target must lie strictly in (0, 1), got {target!r}")
    if not isinstance(max_n, int) or max_n < 1:
        raise DomainError(f"max_n must be a positive integer, got {max_n!r}")
    p_eff = bayes_adjusted_competence(p, prior) if prior is not None else p
    if p_eff <= 0.5 and t > p_eff:
        return PlanResult(
            required_n=None,
            achieved_value=None,
            reason=(
                f"effective competence {p_eff:.6g} is at or below 1/2; "
                f"a single agent is optimal and cannot reach {t:.6g}"
            ),
        )
    for n in range(1, max_n + 1, 2):
        value = consensus_probability(n, p_eff, policy)
        if value >= t:
            return PlanResult(required_n=n, achieved_value=value)
    return PlanResult(
        required_n=None,
        achieved_value=None,
        reason=f"no odd count up to {max_n} reaches {t:.6g}",
    )


def _homogeneous_pmf(count: int, competence: float) -> np.ndarray:
    return get_backend().poisson_binomial_pmf(np.full(count, competence))


def _quorum_ints(policy: VotePolicy) -> tuple[int, int]:
    q = policy.quorum
    return q.numerator, q.denominator


def _verified_improvement(
    group_a: AgentClass, b: int, p_b: float, baseline: float, policy: VotePolicy
) -> float | None:
    """Re-evaluate a sweep candidate through the canonical mixed model."""
    merged = Ensemble((group_a, AgentClass(b, p_b)))
    value = mixed_consensus_probability(merged, policy)
    return value if value > baseline else None


def critical_group_size(
    group_a: AgentClass,
    addition_competence: float,
    *,
    search_cap: int = 5000,
    policy: VotePolicy = SIMPLE_MAJORITY,
) -> CriticalSizeResult:
    """Smallest parity-preserving addition that beats the base group alone.

    Scans even addition sizes 2, 4, ... up to ``search_cap`` with an
    incremental convolution and returns the first size whose merged
    consensus probability strictly exceeds the base group's.  A sub-1/2
    addition competence is reported NEVER after a spot-check of small
    sizes confirms the expected direction; the rare corner where an even
    base group's tie burden makes a tiny sub-1/2 addition profitable falls
    through to the full scan instead of asserting the theory.
    """
    if not (0.5 < group_a.competence < 1.0):
        raise DomainError(
            f"base group competence must lie in (1/2, 1), got {group_a.competence!r}"
        )
    p_b = _check_probability(addition_competence, "addition competence")
    if not isinstance(search_cap, int) or search_cap < 2:
        raise DomainError(f"search cap must be an integer >= 2, got {search_cap!r}")
    kb = get_backend()
    baseline = consensus_probability(group_a.count, group_a.competence, policy)
    base_pmf = _homogeneous_pmf(group_a.count, group_a.competence)
    qn, qd = _quorum_ints(policy)
    if p_b < 0.5:
        sample = kb.sweep_margins(
            base_pmf, p_b, min(search_cap, _NEVER_SAMPLE_CAP), 2, qn, qd, baseline
        )
        if np.all(sample <= 0.0):
            return CriticalSizeResult(
                verdict=SizeVerdict.NEVER,
                b_star=None,
                search_cap=search_cap,
                baseline=baseline,
                achieved_value=None,
            )
    margins = kb.sweep_margins(base_pmf, p_b, search_cap, 2, qn, qd, baseline)
    for idx in np.flatnonzero(margins > 0.0):
        b = 2 * (int(idx) + 1)
        achieved = _verified_improvement(group_a, b, p_b, baseline, policy)
        if achieved is not None:
            return CriticalSizeResult(
                verdict=SizeVerdict.FOUND,
                b_star=b,
                search_cap=search_cap,
                baseline=baseline,
                achieved_value=achieved,
            )
    return CriticalSizeResult(
        verdict=SizeVerdict.NONE_WITHIN_BOUND,
        b_star=None,
        search_cap=search_cap,
        baseline=baseline,
        achieved_value=None,
    )


def critical_competence(
    a_competence: float,
    a_count: int,
    *,
    search_cap: int = 200,
    tolerance: float = 1e-4,
    policy: VotePolicy = SIMPLE_MAJORITY,
) -> float:
    """Infimum addition competence that helps at every size up to the cap.

    Bisects the addition competence over (1/2, a_competence) on the
    predicate "every even addition size 2..search_cap leaves the merged
    consensus probability at or above the base group's".  The predicate is
    monotone in the addition competence, and at 1/2 the two-agent addition
    always fails it, so the bracket is guaranteed.
    """
    p_a = _check_probability(a_competence, "base competence")
    if not (0.5 < p_a < 1.0):
        raise DomainError(f"base competence must lie in (1/2, 1), got {p_a!r}")
    if not isinstance(a_count, int) or a_count < 1 or a_count % 2 == 0:
        raise DomainError(f"base count must be a positive odd integer, got {a_count!r}")
    if not (tolerance >= 1e-6):
        raise DomainError(f"tolerance must be >= 1e-6, got {tolerance!r}")
    if not isinstance(search_cap, int) or search_cap < 2:
        raise DomainError(f"search cap must be an integer >= 2, got {search_cap!r}")
    kb = get_backend()
    baseline = consensus_probability(a_count, p_a, policy)
    base_pmf = _homogeneous_pmf(a_count, p_a)
    qn, qd = _quorum_ints(policy)

    def helps_at_every_size(p_b: float) -> bool:
        margins = kb.sweep_margins(base_pmf, p_b, search_cap, 2, qn, qd, baseline)
        return bool(np.all(margins >= 0.0))

    if not helps_at_every_size(p_a):
        raise ConvergenceError(
            "bracketing failed: even additions at the base competence "
            "do not dominate the base group"
        )
    lo, hi = 0.5, p_a
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        if helps_at_every_size(mid):
            hi = mid
        else:
            lo = mid
    if hi >= p_a:
        probe = p_a - 0.5 * tolerance
        if probe > 0.5 and helps_at_every_size(probe):
            return probe
        raise ConvergenceError("critical competence sits within tolerance of the base")
    return hi


def subset_dominance(
    group: AgentClass, subset_count: int, policy: VotePolicy = SIMPLE_MAJORITY
) -> tuple[float, float]:
    """Consensus probability of the full group next to one of its subsets.

    For competence above 1/2 the full group strictly dominates any smaller
    subset; below 1/2 the ordering flips, and the pair is reported either
    way without judgement.
    """
    if not isinstance(subset_count, int) or not (1 <= subset_count < group.count):
        raise DomainError(
            f"subset count must be an integer in [1, {group.count - 1}], "
            f"got {subset_count!r}"
        )
    full = consensus_probability(group.count, group.competence, policy)
    subset = consensus_probability(subset_count, group.competence, policy)
    return full, subset
