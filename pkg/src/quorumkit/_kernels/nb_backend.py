"""numba-jitted kernel implementations, twin of ``np_backend``.

Importing this module requires numba; the dispatcher falls back to the
numpy backend when it is missing.  All floating arithmetic is strict IEEE
(no fastmath), performed in the same order as the numpy path, so the two
backends produce bit-for-bit identical results.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_TWO = np.uint64(2)
_UNIT = 1.0 / 9007199254740992.0


@njit(cache=True)
def convolve_one(pmf, p):
    n = pmf.shape[0]
    out = np.zeros(n + 1)
    q = 1.0 - p
    out[0] = pmf[0] * q
    for k in range(1, n):
        out[k] = pmf[k - 1] * p + pmf[k] * q
    out[n] = pmf[n - 1] * p
    return out


@njit(cache=True)
def poisson_binomial_pmf(probs):
    pmf = np.ones(1)
    for i in range(probs.shape[0]):
        pmf = convolve_one(pmf, probs[i])
    return pmf


@njit(cache=True)
def upper_tail(pmf, m):
    if m <= 0:
        m = 0
    if m >= pmf.shape[0]:
        return 0.0
    acc = 0.0
    for k in range(m, pmf.shape[0]):
        acc += pmf[k]
    return acc


@njit(cache=True)
def sweep_margins(base_pmf, p_add, cap, step, quorum_num, quorum_den, target):
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


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def simulate_counts(seed, first_trial, n_trials, competences, p_state, m):
    n_agents = competences.shape[0]
    out = np.zeros(7, dtype=np.int64)
    for idx in range(n_trials):
        t = np.uint64(first_trial + idx)
        key = _mix64(np.uint64(seed) + (t + _ONE) * _GOLDEN)
        u0 = np.float64(_mix64(key + _GOLDEN) >> _S11) * _UNIT
        state_is_1 = u0 < p_state
        correct = 0
        for i in range(n_agents):
            u = np.float64(_mix64(key + (np.uint64(i) + _TWO) * _GOLDEN) >> _S11) * _UNIT
            if u < competences[i]:
                correct += 1
        votes_1 = correct if state_is_1 else n_agents - correct
        chose_1 = votes_1 >= m
        chose_2 = (n_agents - votes_1) >= m
        if chose_1:
            out[3] += 1
            if state_is_1:
                out[4] += 1
                out[0] += 1
            else:
                out[1] += 1
        elif chose_2:
            out[5] += 1
            if not state_is_1:
                out[6] += 1
                out[0] += 1
            else:
                out[1] += 1
        else:
            out[2] += 1
    return out
