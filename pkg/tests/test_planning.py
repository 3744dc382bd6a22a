"""Design-time solvers: agent-count planning and critical-value searches.

The regression constants asserted here were produced first by independent
oracles (exhaustive enumeration, per-size bisection in plain numpy, closed
forms of the two-agent boundary quadratic) and then frozen.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quorumkit import (
    AgentClass,
    ConvergenceError,
    DecisionPrior,
    DomainError,
    Ensemble,
    SizeVerdict,
    consensus_probability,
    critical_competence,
    critical_group_size,
    mixed_consensus_probability,
    plan_agent_count,
    subset_dominance,
)

from _oracles import enumerate_consensus


class TestPlanAgentCount:
    def test_reach_point_eight_with_point_seven_agents(self):
        plan = plan_agent_count(0.7, 0.8)
        assert plan.required_n == 5
        assert plan.attainable
        assert round(plan.achieved_value, 3) == 0.837

    def test_reach_ninety_nine_with_ninety_agents(self):
        plan = plan_agent_count(0.9, 0.99)
        assert plan.required_n == 5
        assert plan.achieved_value >= 0.99

    def test_fair_coin_cannot_improve(self):
        plan = plan_agent_count(0.5, 0.6)
        assert not plan.attainable
        assert plan.required_n is None
        assert plan.reason

    def test_neutralizing_prior_cannot_improve(self):
        plan = plan_agent_count(0.7, 0.6, prior=DecisionPrior(0.3))
        assert not plan.attainable

    def test_prior_changes_the_answer(self):
        bare = plan_agent_count(0.7, 0.9)
        boosted = plan_agent_count(0.7, 0.9, prior=DecisionPrior(0.8))
        assert boosted.required_n < bare.required_n

    def test_trivial_target_needs_one_agent(self):
        plan = plan_agent_count(0.8, 0.75)
        assert plan.required_n == 1
        assert plan.achieved_value == pytest.approx(0.8, abs=1e-15)

    def test_cap_exhaustion(self):
        plan = plan_agent_count(0.51, 0.99, max_n=21)
        assert not plan.attainable
        assert plan.reason

    @given(
        p=st.floats(min_value=0.55, max_value=0.95),
        target=st.floats(min_value=0.6, max_value=0.995),
    )
    @settings(max_examples=60, deadline=None)
    def test_minimality_certificate(self, p, target):
        plan = plan_agent_count(p, target)
        if not plan.attainable:
            return
        n = plan.required_n
        assert n % 2 == 1
        assert consensus_probability(n, p) >= target
        assert plan.achieved_value == consensus_probability(n, p)
        if n > 2:
            assert consensus_probability(n - 2, p) < target

    def test_validation(self):
        with pytest.raises(DomainError):
            plan_agent_count(0.7, 1.0)
        with pytest.raises(DomainError):
            plan_agent_count(1.2, 0.8)
        with pytest.raises(DomainError):
            plan_agent_count(0.7, 0.8, max_n=0)


class TestCriticalGroupSize:
    def test_incompetent_additions_never_help(self):
        result = critical_group_size(AgentClass(3, 0.8), 0.40)
        assert result.verdict is SizeVerdict.NEVER
        assert result.b_star is None

    def test_competent_pair_helps_a_strong_trio(self):
        result = critical_group_size(AgentClass(3, 0.8), 0.75)
        assert result.verdict is SizeVerdict.FOUND
        assert result.b_star == 2
        assert result.baseline == pytest.approx(0.896, abs=1e-12)
        assert result.achieved_value == pytest.approx(0.926, abs=1e-12)

    def test_found_result_is_verified_at_both_sides(self):
        result = critical_group_size(AgentClass(3, 0.8), 0.75)
        base = mixed_consensus_probability(Ensemble([AgentClass(3, 0.8)]))
        at_star = mixed_consensus_probability(
            Ensemble([AgentClass(3, 0.8), AgentClass(result.b_star, 0.75)])
        )
        just_below = mixed_consensus_probability(
            Ensemble([AgentClass(3, 0.8), AgentClass(result.b_star - 1, 0.75)])
        )
        assert at_star > base
        assert just_below <= base

    def test_marginal_additions_to_thirty_strong(self):
        # A barely-competent crowd can eventually lift a 30-agent group,
        # but the crossing sits in the five figures, far beyond the cap
        result = critical_group_size(AgentClass(30, 0.7), 0.51, search_cap=5000)
        assert result.verdict is SizeVerdict.NONE_WITHIN_BOUND
        assert result.b_star is None

    @pytest.mark.slow
    def test_marginal_additions_crossing_point_pinned(self):
        # frozen by the independent incremental-convolution oracle
        result = critical_group_size(AgentClass(30, 0.7), 0.51, search_cap=10_200)
        assert result.verdict is SizeVerdict.FOUND
        assert result.b_star == 10_150

    def test_never_verdict_spot_checks_instead_of_assuming(self):
        # competence exactly at one half: still never helps
        result = critical_group_size(AgentClass(5, 0.7), 0.4999)
        assert result.verdict is SizeVerdict.NEVER

    def test_never_is_sound_on_a_grid(self):
        for a_count in (3, 5, 7):
            for p_a in (0.6, 0.7, 0.8, 0.9):
                base = consensus_probability(a_count, p_a)
                for p_b in [x / 100 for x in range(5, 50, 5)]:
                    for b in range(1, 21):
                        mixed = mixed_consensus_probability(
                            Ensemble([AgentClass(a_count, p_a), AgentClass(b, p_b)])
                        )
                        assert mixed < base

    def test_solver_agrees_with_enumeration_on_small_groups(self):
        # brute force over every addition size, evaluating each mixed group
        # by full outcome enumeration
        cases = [
            (3, 0.8, 0.75),
            (3, 0.8, 0.55),
            (5, 0.7, 0.72),
            (5, 0.9, 0.65),
            (7, 0.6, 0.58),
            (7, 0.75, 0.74),
            (3, 0.6, 0.52),
        ]
        for a_count, p_a, p_b in cases:
            base = enumerate_consensus([p_a] * a_count, a_count // 2 + 1)
            improving = []
            for b in range(1, 6):
                n = a_count + b
                value = enumerate_consensus(
                    sorted([p_a] * a_count + [p_b] * b), n // 2 + 1
                )
                if value > base:
                    improving.append(b)
            # odd-size additions can improve an odd group (threshold climbs
            # (b+1)/2 for b extra votes), but never before a smaller even
            # size does: the smallest improving size is even whenever one
            # exists, which is what makes the even-step search complete
            if improving:
                assert improving[0] % 2 == 0
            result = critical_group_size(AgentClass(a_count, p_a), p_b, search_cap=5)
            if improving:
                assert result.verdict is SizeVerdict.FOUND
                assert result.b_star == improving[0]
            else:
                assert result.verdict is not SizeVerdict.FOUND

    def test_validation(self):
        with pytest.raises(DomainError):
            critical_group_size(AgentClass(3, 0.45), 0.6)
        with pytest.raises(DomainError):
            critical_group_size(AgentClass(3, 0.8), 0.6, search_cap=0)


class TestCriticalCompetence:
    # closed forms of the two-agent-addition boundary: the binding size is
    # b = 2, where the helps/hurts boundary solves a quadratic in p_b
    FIXTURES = {
        0.6: 3 - math.sqrt(6),  # 0.5505102572...
        0.7: (14 - math.sqrt(84)) / 8,  # 0.6043560763...
        0.8: 2 / 3,
        0.9: 0.75,
    }

    def test_frozen_fixtures(self):
        for p_a, expected in self.FIXTURES.items():
            got = critical_competence(p_a, 3, search_cap=50, tolerance=1e-4)
            assert got == pytest.approx(expected, abs=1e-4)

    def test_sandwich_and_monotone(self):
        values = []
        for p_a in (0.6, 0.7, 0.8, 0.9):
            value = critical_competence(p_a, 3, search_cap=50, tolerance=1e-4)
            assert 0.5 < value < p_a
            values.append(value)
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_threshold_actually_separates(self):
        # just above the returned value every even addition size helps;
        # just below, some size hurts
        p_a = 0.8
        value = critical_competence(p_a, 3, search_cap=50, tolerance=1e-4)
        base = consensus_probability(3, p_a)
        above, below = value + 5e-4, value - 5e-4
        for b in range(2, 51, 2):
            mixed = mixed_consensus_probability(
                Ensemble([AgentClass(3, p_a), AgentClass(b, above)])
            )
            assert mixed >= base
        hurts_somewhere = any(
            mixed_consensus_probability(
                Ensemble([AgentClass(3, p_a), AgentClass(b, below)])
            )
            < base
            for b in range(2, 51, 2)
        )
        assert hurts_somewhere

    def test_larger_base_groups(self):
        for a_count in (5, 7, 9):
            value = critical_competence(0.8, a_count, search_cap=30, tolerance=1e-4)
            assert 0.5 < value < 0.8

    def test_validation(self):
        with pytest.raises(DomainError):
            critical_competence(0.45, 3)
        with pytest.raises(DomainError):
            critical_competence(0.8, 4)  # even base group
        with pytest.raises(DomainError):
            critical_competence(0.8, 3, tolerance=1e-9)
        with pytest.raises(DomainError):
            critical_competence(0.8, 3, search_cap=1)


class TestSubsetDominance:
    def test_majority_of_competent_group_is_still_worse(self):
        full, subset = subset_dominance(AgentClass(5, 0.7), 3)
        assert round(full, 3) == 0.837
        assert round(subset, 3) == 0.784
        assert full > subset

    def test_strong_group(self):
        full, subset = subset_dominance(AgentClass(9, 0.9), 3)
        assert round(full, 3) == 0.999
        assert round(subset, 3) == 0.972

    def test_incompetent_group_reverses_without_error(self):
        full, subset = subset_dominance(AgentClass(7, 0.3), 3)
        assert round(full, 3) == 0.126
        assert round(subset, 3) == 0.216
        assert full < subset  # reported, not prevented

    @given(
        count=st.integers(min_value=2, max_value=10).map(lambda k: 2 * k + 1),
        subset=st.integers(min_value=1, max_value=9),
        p=st.floats(min_value=0.51, max_value=0.99),
    )
    @settings(max_examples=80, deadline=None)
    def test_dominance_for_competent_groups(self, count, subset, p):
        if subset >= count:
            return
        full, part = subset_dominance(AgentClass(count, p), subset)
        assert full >= part
        if subset % 2 == 1 and part < 1.0 - 1e-12:
            assert full > part

    def test_validation(self):
        with pytest.raises(DomainError):
            subset_dominance(AgentClass(5, 0.7), 5)
        with pytest.raises(DomainError):
            subset_dominance(AgentClass(5, 0.7), 0)
