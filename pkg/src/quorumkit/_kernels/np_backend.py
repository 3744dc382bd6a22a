"""Pure-numpy kernel implementations.

Every function here has a numba twin in ``nb_backend``; the pair must stay
bit-for-bit identical.  That holds because both sides perform the same
floating-point operations in the same order: convolutions mirror the scalar
recurrence elementwise, and tail sums chain left to right (cumsum) instead
of using np.sum's pairwise tree.
"""

from __future__ import annotations

import numpy as np

# splitmix64 finalizer constants
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO = np.uint64(2)
_UNIT = 1.0 / 9007199254740992.0  # 2**-53


def convolve_one(pmf: np.ndarray, p: float) -> np.ndarray:
    """Add one agent with success probability p to a correct-vote pmf."""
    out = np.zeros(pmf.shape[0] + 1)
    out[1:] = pmf * p
    out[:-1] += pmf * (1.0 - p)
    return out


def poisson_binomial_pmf(probs: np.ndarray) -> np.ndarray:
    pmf = np.ones(1)
    for p in probs:
        pmf = convolve_one(pmf, float(p))
    return pmf


def upper_tail(pmf: np.ndarray, m: int) -> float:
    # cumsum chains additions left to right, matching the numba loop bitwise
    # (np.sum would not: its pairwise tree rounds differently).
    if m <= 0:
        m = 0
    if m >= pmf.shape[0]:
        return 0.0
    return float(np.cumsum(pmf[m:])[-1])


def sweep_margins(
    base_pmf: np.ndarray,
    p_add: float,
    cap: int,
    step: int,
    quorum_num: int,
    quorum_den: int,
    target: float,
) -> np.ndarray:
    """Tail-minus-target after adding step, 2*step, ... agents (up to cap).

    The incremental convolution keeps the whole sweep O(cap * (n + cap)).
    Thresholds are computed in exact integer arithmetic from the quorum
    fraction.
    """
    n_steps = cap // step
    margins = np.empty(n_steps)
    pmf = base_pmf.copy()
    for i in range(n_steps):
        for _ in range(step):
            pmf = convolve_one(pmf, p_add)
        n = pmf.shape[0] - 1
        m = (quorum_num * n) // quorum_den + 1
        margins[i] = upper_tail(pmf, m) - target
    return margins


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def simulate_counts(
    seed: np.uint64,
    first_trial: int,
    n_trials: int,
    competences: np.ndarray,
    p_state: float,
    m: int,
) -> np.ndarray:
    """Tally a block of trials; returns int64 counts.

    Layout: [correct, wrong, tie, chosen_1, chosen_1_true, chosen_2,
    chosen_2_true].  Each trial's variates come from a stateless substream
    keyed on (seed, trial_index), so the result is independent of blocking.
    """
    n_agents = competences.shape[0]
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        t = np.arange(first_trial, first_trial + n_trials, dtype=np.uint64)
        key = _mix64(np.uint64(seed) + (t + _ONE) * _GOLDEN)
        u0 = ((_mix64(key + _GOLDEN) >> _S11)).astype(np.float64) * _UNIT
        state_is_1 = u0 < p_state
        correct = np.zeros(n_trials, dtype=np.int64)
        for i in range(n_agents):
            u = ((_mix64(key + (np.uint64(i) + _TWO) * _GOLDEN) >> _S11)).astype(
                np.float64
            ) * _UNIT
            correct += u < competences[i]
    votes_1 = np.where(state_is_1, correct, n_agents - correct)
    chose_1 = votes_1 >= m
    chose_2 = (n_agents - votes_1) >= m
    tie = ~(chose_1 | chose_2)
    won = (chose_1 & state_is_1) | (chose_2 & ~state_is_1)
    out = np.empty(7, dtype=np.int64)
    out[0] = int(won.sum())
    out[1] = int((~won & ~tie).sum())
    out[2] = int(tie.sum())
    out[3] = int(chose_1.sum())
    out[4] = int((chose_1 & state_is_1).sum())
    out[5] = int(chose_2.sum())
    out[6] = int((chose_2 & ~state_is_1).sum())
    return out


def simulate_arrays(
    seed: np.uint64,
    first_trial: int,
    n_trials: int,
    competences: np.ndarray,
    p_state: float,
    m: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-trial (true_state, correct_votes, outcome) arrays; outcome 0 = tie."""
    n_agents = competences.shape[0]
    with np.errstate(over="ignore"):
        t = np.arange(first_trial, first_trial + n_trials, dtype=np.uint64)
        key = _mix64(np.uint64(seed) + (t + _ONE) * _GOLDEN)
        u0 = ((_mix64(key + _GOLDEN) >> _S11)).astype(np.float64) * _UNIT
        state_is_1 = u0 < p_state
        correct = np.zeros(n_trials, dtype=np.int64)
        for i in range(n_agents):
            u = ((_mix64(key + (np.uint64(i) + _TWO) * _GOLDEN) >> _S11)).astype(
                np.float64
            ) * _UNIT
            correct += u < competences[i]
    votes_1 = np.where(state_is_1, correct, n_agents - correct)
    outcome = np.zeros(n_trials, dtype=np.int64)
    outcome[votes_1 >= m] = 1
    outcome[(n_agents - votes_1) >= m] = 2
    true_state = np.where(state_is_1, 1, 2).astype(np.int64)
    return true_state, correct, outcome
