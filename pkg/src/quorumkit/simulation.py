"""Seeded Monte Carlo cross-check of the analytic model.

Every trial draws a true state and one vote per agent, tallies the votes
under the quorum policy, and scores the outcome.  Determinism contract:
each trial's randomness comes from a stateless substream keyed on
(seed, trial_index), so a configuration fixes every trial record exactly,
independent of execution order, blocking, threading, or kernel backend.

The mixing function is the splitmix64 finalizer over a golden-ratio
counter:

    key(seed, t)    = mix64(seed + (t + 1) * GOLDEN)      (mod 2**64)
    u(key, j)       = mix64(key + (j + 1) * GOLDEN) >> 11, scaled by 2**-53

Variate j = 0 decides the true state; variate j = i + 1 is agent i's vote,
agents flattened in class order.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import IO, Union

import numpy as np

from ._kernels import get_backend, np_backend
from .core import (
    SIMPLE_MAJORITY,
    DomainError,
    Ensemble,
    VotePolicy,
    majority_threshold,
)
from .priors import DecisionPrior

__all__ = [
    "GOLDEN",
    "mix64",
    "substream_key",
    "unit_draw",
    "SimulationConfig",
    "TrialRecord",
    "SimulationOutcome",
    "run_trial",
    "simulate",
    "write_trace",
]

GOLDEN = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1
_CHUNK = 1 << 16


def mix64(value: int) -> int:
    """splitmix64 finalizer; reference scalar form of the kernel mixers."""
    z = value & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def substream_key(seed: int, trial_index: int) -> int:
    return mix64((seed + (trial_index + 1) * GOLDEN) & _MASK)


def unit_draw(key: int, variate_index: int) -> float:
    """Uniform [0, 1) draw, 53 significant bits."""
    bits = mix64((key + (variate_index + 1) * GOLDEN) & _MASK)
    return (bits >> 11) * 2.0**-53


@dataclass(frozen=True)
class SimulationConfig:
    ensemble: Ensemble
    trials: int
    seed: int
    prior: DecisionPrior = field(default_factory=DecisionPrior)
    policy: VotePolicy = SIMPLE_MAJORITY

    def __post_init__(self) -> None:
        if not isinstance(self.trials, int) or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 1 << 64):
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    true_state: int  # 1 or 2
    correct_votes_by_class: tuple[int, ...]
    outcome: int  # 1 or 2, 0 for a tie

    @property
    def correct_votes(self) -> int:
        return sum(self.correct_votes_by_class)

    @property
    def consensus_correct(self) -> bool:
        return self.outcome == self.true_state


@dataclass(frozen=True)
class SimulationOutcome:
    """Aggregate tallies; correct + wrong + ties always equals trials."""

    trials: int
    correct_consensus: int
    wrong_consensus: int
    ties: int
    alternative_chosen: tuple[int, int]
    alternative_chosen_true: tuple[int, int]

    @property
    def empirical_p_c(self) -> float | None:
        """Correct-consensus share among rounds that reached consensus;
        None when every round tied."""
        decided = self.trials - self.ties
        if decided == 0:
            return None
        return self.correct_consensus / decided

    def empirical_p_r(self, alternative: int = 1) -> float | None:
        """Share of rounds choosing ``alternative`` where it was the truth;
        None when it was never chosen."""
        if alternative not in (1, 2):
            raise DomainError(f"alternative must be 1 or 2, got {alternative!r}")
        chosen = self.alternative_chosen[alternative - 1]
        if chosen == 0:
            return None
        return self.alternative_chosen_true[alternative - 1] / chosen


def run_trial(config: SimulationConfig, trial_index: int) -> TrialRecord:
    """Reconstruct one trial exactly as the batch kernels would play it."""
    if not (0 <= trial_index < config.trials):
        raise DomainError(
            f"trial index {trial_index!r} outside 0..{config.trials - 1}"
        )
    key = substream_key(config.seed, trial_index)
    true_state = 1 if unit_draw(key, 0) < config.prior.p_state else 2
    per_class: list[int] = []
    agent = 0
    correct_total = 0
    for cls in config.ensemble.classes:
        hits = 0
        for _ in range(cls.count):
            if unit_draw(key, agent + 1) < cls.competence:
                hits += 1
            agent += 1
        per_class.append(hits)
        correct_total += hits
    n = config.ensemble.total_count
    m = majority_threshold(n, config.policy)
    votes_1 = correct_total if true_state == 1 else n - correct_total
    if votes_1 >= m:
        outcome = 1
    elif n - votes_1 >= m:
        outcome = 2
    else:
        outcome = 0
    return TrialRecord(
        trial_index=trial_index,
        true_state=true_state,
        correct_votes_by_class=tuple(per_class),
        outcome=outcome,
    )


def _chunk_bounds(trials: int) -> list[tuple[int, int]]:
    # fixed-size blocks regardless of worker count, so partial tallies
    # always sum in the same integer order
    return [(lo, min(_CHUNK, trials - lo)) for lo in range(0, trials, _CHUNK)]


def simulate(config: SimulationConfig, *, workers: int = 1) -> SimulationOutcome:
    """Run every trial and tally; bitwise reproducible for a given config.

    ``workers`` only parallelises the work: tallies are integers summed per
    fixed-size block, so any worker count produces the identical outcome.
    """
    if not isinstance(workers, int) or workers < 1:
        raise DomainError(f"workers must be a positive integer, got {workers!r}")
    kb = get_backend()
    comps = config.ensemble.competences()
    m = majority_threshold(config.ensemble.total_count, config.policy)
    seed = np.uint64(config.seed)
    p_state = config.prior.p_state
    bounds = _chunk_bounds(config.trials)

    def run_block(bound: tuple[int, int]) -> np.ndarray:
        lo, count = bound
        return kb.simulate_counts(seed, lo, count, comps, p_state, m)

    if workers == 1 or len(bounds) == 1:
        parts = [run_block(b) for b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_block, bounds))
    totals = np.sum(np.stack(parts), axis=0)
    return SimulationOutcome(
        trials=config.trials,
        correct_consensus=int(totals[0]),
        wrong_consensus=int(totals[1]),
        ties=int(totals[2]),
        alternative_chosen=(int(totals[3]), int(totals[5])),
        alternative_chosen_true=(int(totals[4]), int(totals[6])),
    )


def write_trace(config: SimulationConfig, destination: Union[str, IO[str]]) -> int:
    """Write one JSON record per trial, newline-delimited; returns the count.

    Record fields: trial, true_state (1|2), correct_votes, outcome
    (1|2, 0 for a tie).  The stream is a pure function of the config.
    """
    comps = config.ensemble.competences()
    m = majority_threshold(config.ensemble.total_count, config.policy)
    seed = np.uint64(config.seed)

    def emit(handle: IO[str]) -> int:
        written = 0
        for lo, count in _chunk_bounds(config.trials):
            states, hits, outcomes = np_backend.simulate_arrays(
                seed, lo, count, comps, config.prior.p_state, m
            )
            for i in range(count):
                record = {
                    "trial": lo + i,
                    "true_state": int(states[i]),
                    "correct_votes": int(hits[i]),
                    "outcome": int(outcomes[i]),
                }
                handle.write(json.dumps(record, separators=(",", ":")) + "\n")
                written += 1
        return written

    if isinstance(destination, str):
        with open(destination, "w", encoding="utf-8") as handle:
            return emit(handle)
    return emit(destination)
