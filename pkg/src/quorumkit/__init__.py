"""quorumkit: is majority-vote consensus sound for this agent pool, and
with how many agents?

Exact binomial/Poisson-binomial vote modelling, Bayes prior adjustment,
closed-form approximations with reported error, design-time solvers, and
a seeded Monte Carlo cross-check, behind one library and CLI.
"""

from .approx import (
    ApproximationReport,
    normal_route_consensus,
    poisson_consensus_probability,
    pooled_competence,
    pooled_variance,
)
from .core import (
    SIMPLE_MAJORITY,
    AgentClass,
    DomainError,
    Ensemble,
    VoteDistribution,
    VotePolicy,
    consensus_probability,
    correct_vote_distribution,
    majority_threshold,
    mixed_consensus_probability,
)
from .planning import (
    ConvergenceError,
    CriticalSizeResult,
    PlanResult,
    SizeVerdict,
    critical_competence,
    critical_group_size,
    plan_agent_count,
    subset_dominance,
)
from .priors import (
    Advice,
    ConsensusAdvice,
    DecisionPrior,
    bayes_adjusted_competence,
    consensus_advice,
    consensus_probability_with_priors,
)
from .simulation import (
    SimulationConfig,
    SimulationOutcome,
    TrialRecord,
    run_trial,
    simulate,
    write_trace,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AgentClass",
    "Advice",
    "ApproximationReport",
    "ConsensusAdvice",
    "ConvergenceError",
    "CriticalSizeResult",
    "DecisionPrior",
    "DomainError",
    "Ensemble",
    "PlanResult",
    "SIMPLE_MAJORITY",
    "SimulationConfig",
    "SimulationOutcome",
    "SizeVerdict",
    "TrialRecord",
    "VoteDistribution",
    "VotePolicy",
    "bayes_adjusted_competence",
    "consensus_advice",
    "consensus_probability",
    "consensus_probability_with_priors",
    "correct_vote_distribution",
    "critical_competence",
    "critical_group_size",
    "majority_threshold",
    "mixed_consensus_probability",
    "normal_route_consensus",
    "plan_agent_count",
    "poisson_consensus_probability",
    "pooled_competence",
    "pooled_variance",
    "run_trial",
    "simulate",
    "subset_dominance",
    "write_trace",
]
