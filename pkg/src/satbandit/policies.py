"""UCL decision rules for the eight satisficing objectives.

Robust problems (5-8) are not handled here directly: :func:`wrap_robust`
turns them into their mean-reward counterpart acting on standardized rewards,
and the selection rules below only ever see problems 1-4.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .belief import BeliefState, Prior, transform_prior_standardized
from .environment import ObjectiveSpec, Problem
from .errors import InfeasibleObjectiveError, InvalidArgumentError
from .gaussian_stats import ndtri, std_normal_quantile


class Heuristic(str, enum.Enum):
    gaussian_known_variance = "gaussian_known_variance"
    ucb1_normal = "ucb1_normal"
    sub_gaussian = "sub_gaussian"
    ucb1_bounded = "ucb1_bounded"


class EligibleRule(str, enum.Enum):
    # max_q: best eligible arm by Q; sticky: keep the previous arm while it stays eligible
    max_q = "max_q"
    sticky = "sticky"


@dataclass(frozen=True)
class PolicySpec:
    objective: ObjectiveSpec
    K: float = 1.0
    heuristic: Heuristic = Heuristic.gaussian_known_variance
    zeta: Optional[float] = None
    prior: Optional[Prior] = None
    eligible_rule: EligibleRule = EligibleRule.max_q

    def __post_init__(self):
        object.__setattr__(self, "heuristic", Heuristic(self.heuristic))
        object.__setattr__(self, "eligible_rule", EligibleRule(self.eligible_rule))
        if not (self.K > 0 and math.isfinite(self.K)):
            raise InvalidArgumentError(f"K must be positive, got {self.K!r}")
        if self.heuristic is Heuristic.sub_gaussian and not (self.zeta is not None and self.zeta > 0):
            raise InvalidArgumentError("the sub-Gaussian heuristic needs zeta > 0")

    @property
    def problem(self) -> Problem:
        return self.objective.problem

    def prior_for(self, n_arms: int) -> Prior:
        prior = self.prior if self.prior is not None else Prior.uninformative(n_arms)
        if prior.n_arms != n_arms:
            raise InvalidArgumentError(f"prior has {prior.n_arms} arms, instance has {n_arms}")
        return prior


@dataclass(frozen=True)
class Decision:
    arm: int
    q_values: np.ndarray
    eligible_set: Optional[frozenset] = None
    forced: bool = False


@dataclass(frozen=True)
class RobustWrapper:
    """Maps raw rewards onto the standardized scale the wrapped policy learns on."""

    M: float
    stds: np.ndarray = field(repr=False)

    def __call__(self, arm: int, reward: float) -> float:
        return (reward - self.M) / self.stds[arm]

    @property
    def noise_stds(self) -> np.ndarray:
        return np.ones_like(self.stds)


# --- heuristic values -----------------------------------------------------

def ucl_alpha(t: int, K: float) -> float:
    return min(1.0 / (K * t), 1.0)


def ucl_quantile(t: int, K: float) -> float:
    return float(ndtri(1.0 - ucl_alpha(t, K)))


def ucl_q(mean: float, std: float, t: int, K: float = 1.0) -> float:
    """mu + sigma * Phi^{-1}(1 - 1/(K t)); +inf for an arm with infinite std."""
    if t < 1:
        raise InvalidArgumentError("time index starts at 1")
    if math.isinf(std):
        return math.inf
    if std == 0.0:
        return mean
    return mean + std * ucl_quantile(t, K)


def sufficing_quantile(delta: float, divisor: int) -> float:
    if not (0.0 < delta <= 1.0):
        raise InvalidArgumentError(f"delta must lie in (0, 1], got {delta!r}")
    return float(ndtri(1.0 - delta / divisor))


def sufficing_q(mean: float, std: float, delta: float, divisor: int) -> float:
    if divisor not in (2, 3):
        raise InvalidArgumentError("divisor is 2 (delta-sufficing) or 3 ((M, delta)-satisficing)")
    z = sufficing_quantile(delta, divisor)
    if math.isinf(std):
        return math.inf
    if std == 0.0:
        return mean
    return mean + std * z


def _divisor(problem: Problem) -> int:
    return 3 if problem is Problem.P4_M_delta_satisficing else 2


def _gaussian_q(state: BeliefState, t: int, spec: PolicySpec) -> tuple[np.ndarray, np.ndarray]:
    var = state.variances()
    std = np.sqrt(var)
    if spec.problem.sufficing:
        z = sufficing_quantile(spec.objective.delta, _divisor(spec.problem))
    else:
        z = ucl_quantile(t, spec.K)
    unknown = np.isinf(var)
    with np.errstate(invalid="ignore"):
        q = state.mu + std * z
    q = np.where(std == 0.0, state.mu, q)
    q[unknown] = np.inf
    return q, unknown


def ucb1_normal_q(state: BeliefState, arm: int, t: int, delta: float = 0.0, k_tilde: int = 2) -> float:
    """UCB1-NORMAL index; with ``delta > 0`` the time-free sufficing form."""
    n = int(state.pulls[arm])
    if n < 2:
        return math.inf
    mbar = state.reward_sum[arm] / n
    spread = max(state.sq_accum[arm] - n * mbar * mbar, 0.0) / (n - 1)
    if delta > 0:
        return mbar + math.sqrt(4.0 * spread * math.log(k_tilde / delta) / n)
    return mbar + math.sqrt(16.0 * spread * math.log(t) / n)


def ucb1_normal_forced_level(t: int) -> int:
    return math.ceil(8.0 * math.log(t)) if t >= 1 else 0


def sub_gaussian_q(state: BeliefState, arm: int, t: int, zeta: float,
                   delta: float = 0.0, k_tilde: int = 2) -> float:
    n = int(state.pulls[arm])
    if n < 1:
        return math.inf
    mbar = state.reward_sum[arm] / n
    if delta > 0:
        return mbar + math.sqrt(2.0 * zeta * math.log(k_tilde / delta) / n)
    return mbar + math.sqrt(8.0 * zeta * math.log(t) / n)


def ucb1_q(state: BeliefState, arm: int, t: int, delta: float = 0.0, k_tilde: int = 2) -> float:
    n = int(state.pulls[arm])
    if n < 1:
        return math.inf
    mbar = state.reward_sum[arm] / n
    if delta > 0:
        return mbar + math.sqrt(math.log(k_tilde / delta) / (2.0 * n))
    return mbar + math.sqrt(2.0 * math.log(t) / n)


def q_values(state: BeliefState, t: int, spec: PolicySpec) -> tuple[np.ndarray, np.ndarray]:
    """Heuristic values for every arm and the mask of arms that must be forced."""
    if t < 1:
        raise InvalidArgumentError("time index starts at 1")
    h = spec.heuristic
    if h is Heuristic.gaussian_known_variance:
        return _gaussian_q(state, t, spec)
    delta = spec.objective.delta
    k_tilde = _divisor(spec.problem)
    n = state.n_arms
    if h is Heuristic.ucb1_normal:
        q = np.array([ucb1_normal_q(state, i, t, delta, k_tilde) for i in range(n)])
        level = 2 if delta > 0 else max(ucb1_normal_forced_level(t), 2)
        return q, state.pulls < level
    if h is Heuristic.sub_gaussian:
        q = np.array([sub_gaussian_q(state, i, t, spec.zeta, delta, k_tilde) for i in range(n)])
    else:
        q = np.array([ucb1_q(state, i, t, delta, k_tilde) for i in range(n)])
    return q, state.pulls < 1


# --- selection --------------------------------------------------------------

def choose_eligible(q: np.ndarray, threshold: float, previous: Optional[int],
                    rule: EligibleRule = EligibleRule.max_q) -> tuple[int, frozenset]:
    """Pick from {i : Q_i >= threshold}; empty set falls back to argmax Q."""
    q = np.asarray(q, dtype=np.float64)
    eligible = q >= threshold
    members = frozenset(int(i) for i in np.flatnonzero(eligible))
    if not members:
        return int(np.argmax(q)), members
    if EligibleRule(rule) is EligibleRule.sticky and previous is not None and previous in members:
        return int(previous), members
    return int(np.argmax(np.where(eligible, q, -np.inf))), members


def _forced(q: np.ndarray, must: np.ndarray) -> Optional[Decision]:
    if np.any(must):
        return Decision(int(np.argmax(must)), q, None, True)
    return None


def select_ucl(state: BeliefState, t: int, spec: PolicySpec, previous: Optional[int] = None) -> Decision:
    q, must = q_values(state, t, spec)
    forced = _forced(q, must)
    if forced is not None:
        return forced
    return Decision(int(np.argmax(q)), q)


select_delta_sufficing = select_ucl


def _eligible_threshold(spec: PolicySpec) -> float:
    thr = spec.objective.mean_threshold
    if thr is None:
        raise InvalidArgumentError(f"{spec.problem.value} policy needs a mean threshold")
    return float(thr)


def select_satisfaction(state: BeliefState, t: int, spec: PolicySpec,
                        previous: Optional[int] = None) -> Decision:
    q, must = q_values(state, t, spec)
    forced = _forced(q, must)
    if forced is not None:
        return forced
    arm, members = choose_eligible(q, _eligible_threshold(spec), previous, spec.eligible_rule)
    return Decision(arm, q, members)


select_m_delta_satisficing = select_satisfaction


def select(state: BeliefState, t: int, spec: PolicySpec, previous: Optional[int] = None) -> Decision:
    """Dispatch on the (mean-reward) problem of ``spec``."""
    p = spec.problem
    if p.robust:
        raise InvalidArgumentError("robust problems must be wrapped with wrap_robust first")
    if p.thresholded:
        return select_satisfaction(state, t, spec, previous)
    return select_ucl(state, t, spec, previous)


def wrap_robust(spec: PolicySpec, stds, M: float, Pi: Optional[float] = None,
                means=None) -> tuple[PolicySpec, RobustWrapper]:
    """Turn a robust policy (problems 5-8) into its mean-reward counterpart.

    The returned spec learns on standardized rewards with unit noise; its
    prior is the standardized prior and, for problems 6 and 8, its mean
    threshold is X = Phi^{-1}(Pi). ``means`` (omniscient) is only used to
    reject an infeasible Pi.
    """
    stds = np.asarray(stds, dtype=np.float64).reshape(-1)
    obj = spec.objective
    p = obj.problem
    if not p.robust:
        raise InvalidArgumentError(f"{p.value} is not a robust problem")
    threshold = None
    if p.thresholded:
        pi = Pi if Pi is not None else obj.happiness_prob_threshold
        if pi is None:
            raise InvalidArgumentError(f"{p.value} needs a happiness probability threshold")
        threshold = std_normal_quantile(pi)
        if means is not None and not np.any((np.asarray(means) - M) / stds >= threshold):
            raise InfeasibleObjectiveError(f"no arm reaches happiness probability {pi}")
    counterpart = ObjectiveSpec(p.mean_counterpart, mean_threshold=threshold,
                                sufficiency=obj.sufficiency, happiness_threshold=M)
    prior = transform_prior_standardized(spec.prior_for(stds.size), stds, M)
    return replace(spec, objective=counterpart, prior=prior), RobustWrapper(float(M), stds)

