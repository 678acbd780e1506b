import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from satbandit import belief as bel
from satbandit.belief import Prior
from satbandit.environment import ObjectiveSpec
from satbandit.errors import InfeasibleObjectiveError, InvalidArgumentError
from satbandit.policies import (
    EligibleRule, Heuristic, PolicySpec, choose_eligible, q_values, select, select_satisfaction,
    select_ucl, sufficing_q, sufficing_quantile, ucb1_normal_forced_level, ucb1_normal_q, ucb1_q,
    sub_gaussian_q, ucl_alpha, ucl_q, ucl_quantile, wrap_robust,
)

P1 = PolicySpec(ObjectiveSpec("P1"))
P2 = PolicySpec(ObjectiveSpec("P2", mean_threshold=2.5))
P3 = PolicySpec(ObjectiveSpec("P3", sufficiency=0.05))
P4 = PolicySpec(ObjectiveSpec("P4", mean_threshold=2.5, sufficiency=0.05))


def observed(means, pulls, noise=1.0):
    """Flat-prior belief where arm i saw ``pulls[i]`` rewards equal to ``means[i]``."""
    n = len(means)
    s = bel.init(Prior.uninformative(n), np.full(n, noise))
    for i, (m, k) in enumerate(zip(means, pulls)):
        for _ in range(k):
            bel.update(s, i, m, noise)
    return s


def test_ucl_quantile_values():
    assert ucl_alpha(1, 1.0) == 1.0
    assert ucl_quantile(1, 1.0) == -math.inf
    assert ucl_quantile(2, 1.0) == 0.0
    assert ucl_quantile(40, 1.0) == pytest.approx(1.959963984540054, abs=1e-12)
    assert ucl_alpha(3, 0.1) == 1.0  # clamped
    assert ucl_q(1.0, 2.0, 40) == pytest.approx(1.0 + 2.0 * 1.959963984540054, abs=1e-12)
    assert ucl_q(1.0, math.inf, 5) == math.inf
    with pytest.raises(InvalidArgumentError):
        ucl_q(0.0, 1.0, 0)


def test_sufficing_quantile_values():
    assert sufficing_quantile(0.05, 2) == pytest.approx(1.959963984540054, abs=1e-12)
    assert sufficing_quantile(0.05, 3) == pytest.approx(2.1280452341849836, abs=1e-12)
    assert sufficing_q(1.0, 0.5, 0.05, 2) == pytest.approx(1.0 + 0.5 * 1.959963984540054)
    with pytest.raises(InvalidArgumentError):
        sufficing_q(0.0, 1.0, 0.05, 4)
    with pytest.raises(InvalidArgumentError):
        sufficing_quantile(0.0, 2)


@settings(max_examples=200, deadline=None)
@given(st.floats(-10, 10), st.floats(0.01, 10), st.integers(2, 10**6), st.floats(1.0, 10))
def test_ucl_q_increasing_in_t_and_std(mean, std, t, K):
    assert ucl_q(mean, std, t + 1, K) >= ucl_q(mean, std, t, K)
    assert ucl_q(mean, std * 1.5, t, K) >= ucl_q(mean, std, t, K)


def test_forced_initialization_lowest_index_first():
    s = observed([5.0, 0.0, 0.0], [1, 0, 0])
    for spec in (P1, P2, P3, P4):
        d = select(s, 2, spec, previous=0)
        assert d.arm == 1 and d.forced


def test_select_ucl_argmax_and_ties():
    s = observed([1.0, 3.0, 3.0], [4, 4, 4])
    assert select_ucl(s, 10, P1).arm == 1
    s = observed([1.0, 3.0, 2.9], [4, 4, 1])
    assert select_ucl(s, 10, P1).arm == 2  # wider interval wins


def test_select_satisfaction_prefers_best_eligible():
    s = observed([1.0, 3.0, 2.6], [100, 100, 100])
    d = select_satisfaction(s, 50, P2)
    assert d.eligible_set == frozenset({1, 2}) and d.arm == 1


def test_select_satisfaction_falls_back_to_argmax():
    s = observed([1.0, 2.0], [50, 50])
    d = select_satisfaction(s, 20, P2)
    assert d.eligible_set == frozenset() and d.arm == 1


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=6), st.floats(-5, 5),
       st.integers(0, 5))
def test_choose_eligible_properties(q, thr, prev):
    q = np.array(q)
    prev = prev if prev < q.size else None
    arm, members = choose_eligible(q, thr, prev, EligibleRule.max_q)
    assert members == frozenset(np.flatnonzero(q >= thr).tolist())
    if members:
        assert arm in members and q[arm] == max(q[i] for i in members)
    else:
        assert arm == int(np.argmax(q))
    sticky, _ = choose_eligible(q, thr, prev, EligibleRule.sticky)
    if prev is not None and prev in members:
        assert sticky == prev
    else:
        assert sticky == arm


def test_sticky_rule_keeps_eligible_previous():
    spec = PolicySpec(ObjectiveSpec("P2", mean_threshold=2.5), eligible_rule="sticky")
    s = observed([1.0, 3.0, 4.0], [100, 100, 100])
    assert select_satisfaction(s, 50, spec, previous=1).arm == 1
    assert select_satisfaction(s, 50, spec, previous=0).arm == 2


def test_robust_problem_requires_wrapping():
    spec = PolicySpec(ObjectiveSpec("P5", happiness_threshold=2.0))
    with pytest.raises(InvalidArgumentError):
        select(observed([0, 0], [1, 1]), 3, spec)


def test_wrap_robust_p8():
    spec = PolicySpec(ObjectiveSpec("P8", happiness_threshold=2.0, happiness_prob_threshold=0.5,
                                    sufficiency=0.05))
    wrapped, pre = wrap_robust(spec, [1, 1, 1, 3], 2.0)
    assert wrapped.problem.value == "P4"
    assert wrapped.objective.mean_threshold == 0.0
    assert wrapped.objective.delta == 0.05
    assert pre(3, 8.0) == 2.0
    np.testing.assert_array_equal(pre.noise_stds, np.ones(4))
    with pytest.raises(InfeasibleObjectiveError):
        wrap_robust(spec, [1, 1], 2.0, Pi=0.9, means=[1.0, 2.5])
    with pytest.raises(InvalidArgumentError):
        wrap_robust(P1, [1, 1], 0.0)


def test_ucb1_normal_forcing_and_index():
    assert ucb1_normal_forced_level(1) == 0
    assert ucb1_normal_forced_level(10) == math.ceil(8 * math.log(10))
    spec = PolicySpec(ObjectiveSpec("P1"), heuristic="ucb1_normal")
    s = observed([1.0, 2.0], [3, 3])
    _, must = q_values(s, 10, spec)
    assert must.all()  # 3 < ceil(8 ln 10) = 19
    s = bel.init(Prior.uninformative(1), [1.0])
    for r in (1.0, 3.0, 2.0):
        bel.update(s, 0, r, 1.0)
    # sample variance 1, n = 3
    assert ucb1_normal_q(s, 0, 10) == pytest.approx(2.0 + math.sqrt(16 * math.log(10) / 3))
    assert ucb1_normal_q(s, 0, 10, delta=0.05, k_tilde=2) == pytest.approx(
        2.0 + math.sqrt(4 * math.log(2 / 0.05) / 3))
    suff = PolicySpec(ObjectiveSpec("P3", sufficiency=0.05), heuristic="ucb1_normal")
    _, must = q_values(observed([1.0, 2.0], [2, 2]), 50, suff)
    assert not must.any()


def test_sub_gaussian_and_ucb1_indices():
    s = observed([0.5, 0.0], [4, 0])
    assert sub_gaussian_q(s, 0, 10, zeta=2.0) == pytest.approx(0.5 + math.sqrt(16 * math.log(10) / 4))
    assert sub_gaussian_q(s, 1, 10, zeta=2.0) == math.inf
    assert ucb1_q(s, 0, 10) == pytest.approx(0.5 + math.sqrt(2 * math.log(10) / 4))
    assert ucb1_q(s, 0, 10, delta=0.1, k_tilde=3) == pytest.approx(0.5 + math.sqrt(math.log(30) / 8))
    with pytest.raises(InvalidArgumentError):
        PolicySpec(ObjectiveSpec("P1"), heuristic="sub_gaussian")
    assert PolicySpec(ObjectiveSpec("P1"), heuristic=Heuristic.sub_gaussian, zeta=1.0).zeta == 1.0


def test_policy_spec_validation():
    with pytest.raises(InvalidArgumentError):
        PolicySpec(ObjectiveSpec("P1"), K=0.0)
    with pytest.raises(ValueError):
        PolicySpec(ObjectiveSpec("P1"), heuristic="thompson")
    with pytest.raises(InvalidArgumentError):
        PolicySpec(ObjectiveSpec("P1"), prior=Prior.uninformative(3)).prior_for(4)
