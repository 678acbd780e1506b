"""Ground-truth bandit instances and objective specifications.

Everything here is omniscient: policies never read ``BanditInstance.means``;
only reward sampling and regret accounting do.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleObjectiveError, InvalidArgumentError
from .gaussian_stats import std_normal_cdf, std_normal_quantile


class Problem(str, enum.Enum):
    P1_standard = "P1"
    P2_satisfaction_mean = "P2"
    P3_delta_sufficing = "P3"
    P4_M_delta_satisficing = "P4"
    P5_robust = "P5"
    P6_robust_satisfaction = "P6"
    P7_delta_robust_sufficing = "P7"
    P8_Pi_delta_robust_satisficing = "P8"

    @classmethod
    def parse(cls, value) -> "Problem":
        if isinstance(value, Problem):
            return value
        text = str(value).strip()
        for p in cls:
            if text in (p.value, p.name) or text.upper() == p.value:
                return p
        raise InvalidArgumentError(f"unknown problem {value!r}; expected one of P1..P8")

    @property
    def robust(self) -> bool:
        return self in _ROBUST

    @property
    def sufficing(self) -> bool:
        """True for the delta > 0 problems (3, 4, 7, 8)."""
        return self in _SUFFICING

    @property
    def thresholded(self) -> bool:
        """True when the policy reads a known threshold (2, 4, 6, 8)."""
        return self in _THRESHOLDED

    @property
    def mean_counterpart(self) -> "Problem":
        """The mean-reward problem a robust problem reduces to."""
        return _COUNTERPART.get(self, self)


_ROBUST = frozenset({Problem.P5_robust, Problem.P6_robust_satisfaction,
                     Problem.P7_delta_robust_sufficing, Problem.P8_Pi_delta_robust_satisficing})
_SUFFICING = frozenset({Problem.P3_delta_sufficing, Problem.P4_M_delta_satisficing,
                        Problem.P7_delta_robust_sufficing, Problem.P8_Pi_delta_robust_satisficing})
_THRESHOLDED = frozenset({Problem.P2_satisfaction_mean, Problem.P4_M_delta_satisficing,
                          Problem.P6_robust_satisfaction, Problem.P8_Pi_delta_robust_satisficing})
_COUNTERPART = {
    Problem.P5_robust: Problem.P1_standard,
    Problem.P6_robust_satisfaction: Problem.P2_satisfaction_mean,
    Problem.P7_delta_robust_sufficing: Problem.P3_delta_sufficing,
    Problem.P8_Pi_delta_robust_satisficing: Problem.P4_M_delta_satisficing,
}


@dataclass(frozen=True)
class BanditInstance:
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = np.array(self.means, dtype=np.float64).reshape(-1)
        stds = np.array(self.stds, dtype=np.float64).reshape(-1)
        if means.shape != stds.shape:
            raise InvalidArgumentError(
                f"means and stds differ in length ({means.size} vs {stds.size})")
        if means.size < 2:
            raise InvalidArgumentError("a bandit needs at least two arms")
        if not np.all(np.isfinite(means)):
            raise InvalidArgumentError("means must be finite")
        if not np.all(stds > 0) or not np.all(np.isfinite(stds)):
            raise InvalidArgumentError("stds must be finite and strictly positive")
        means.setflags(write=False)
        stds.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    @property
    def n_arms(self) -> int:
        return int(self.means.size)

    @property
    def best_mean(self) -> float:
        return float(self.means.max())

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.means))

    def order(self) -> np.ndarray:
        """Arm indices sorted by decreasing mean (stable, so ties keep index order)."""
        return np.argsort(-self.means, kind="stable")

    def gaps(self) -> np.ndarray:
        return self.best_mean - self.means

    def standardized(self, M: float) -> "BanditInstance":
        """The unit-variance instance with means x_i = (m_i - M) / sigma_i."""
        return BanditInstance((self.means - M) / self.stds, np.ones_like(self.stds))

    def _check_arm(self, arm: int) -> int:
        if not (0 <= int(arm) < self.n_arms) or int(arm) != arm:
            raise InvalidArgumentError(f"arm index {arm!r} out of range for {self.n_arms} arms")
        return int(arm)


@dataclass(frozen=True)
class ObjectiveSpec:
    problem: Problem
    mean_threshold: Optional[float] = None
    sufficiency: float = 0.0
    happiness_threshold: Optional[float] = None
    happiness_prob_threshold: Optional[float] = None

    def __post_init__(self):
        problem = Problem.parse(self.problem)
        object.__setattr__(self, "problem", problem)
        d = float(self.sufficiency)
        object.__setattr__(self, "sufficiency", d)
        if problem.sufficing:
            if not (0.0 < d <= 1.0):
                raise InvalidArgumentError(
                    f"{problem.value} needs sufficiency delta in (0, 1], got {d}")
        elif d != 0.0:
            raise InvalidArgumentError(f"{problem.value} requires sufficiency delta = 0, got {d}")
        if problem in (Problem.P2_satisfaction_mean, Problem.P4_M_delta_satisficing):
            if self.mean_threshold is None:
                raise InvalidArgumentError(f"{problem.value} requires mean_threshold")
        if problem.robust and self.happiness_threshold is None:
            raise InvalidArgumentError(f"{problem.value} requires happiness_threshold")
        if problem in (Problem.P6_robust_satisfaction, Problem.P8_Pi_delta_robust_satisficing):
            pi = self.happiness_prob_threshold
            if pi is None:
                raise InvalidArgumentError(f"{problem.value} requires happiness_prob_threshold")
            if not (0.0 < pi < 1.0):
                raise InvalidArgumentError(f"happiness_prob_threshold must lie in (0, 1), got {pi}")

    @property
    def delta(self) -> float:
        return self.sufficiency

    def standardized_threshold(self) -> float:
        """X = Phi^{-1}(Pi), the mean threshold on the standardized scale (P6/P8)."""
        return std_normal_quantile(self.happiness_prob_threshold)

    def check_feasible(self, instance: BanditInstance) -> None:
        p = self.problem
        if p in (Problem.P2_satisfaction_mean, Problem.P4_M_delta_satisficing):
            satisfying_set(instance, self.mean_threshold)
        if p in (Problem.P6_robust_satisfaction, Problem.P8_Pi_delta_robust_satisficing):
            probs = happiness_probabilities(instance, self.happiness_threshold)
            if not np.any(probs >= self.happiness_prob_threshold):
                raise InfeasibleObjectiveError(
                    f"no arm reaches happiness probability {self.happiness_prob_threshold} "
                    f"(best is {probs.max():.6g})")

    def reference(self, instance: BanditInstance) -> tuple[np.ndarray, float]:
        """Per-arm means on the regret scale and the effective threshold.

        Mean-reward problems use (m, M_eff); robust problems use the
        standardized means (x, X_eff). For 1/3/5/7 the effective threshold is
        the true optimum, which the policy itself never sees.
        """
        p = self.problem
        values = instance.means if not p.robust else (
            (instance.means - self.happiness_threshold) / instance.stds)
        if p.thresholded:
            thr = self.mean_threshold if not p.robust else self.standardized_threshold()
        else:
            thr = float(values.max())
        return np.asarray(values, dtype=np.float64), float(thr)


def sample_reward(instance: BanditInstance, arm: int, rng: np.random.Generator) -> float:
    arm = instance._check_arm(arm)
    return reward_from_noise(instance, arm, float(rng.standard_normal()))


def reward_from_noise(instance: BanditInstance, arm: int, z: float) -> float:
    """m_arm + sigma_arm * z for a given unit-normal realization."""
    return float(instance.means[arm] + instance.stds[arm] * z)


def happiness(reward: float, M: float) -> int:
    return 1 if reward >= M else 0


def _check_sigma(sigma: float) -> None:
    if not sigma > 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma!r}")


def happiness_probability(m: float, sigma: float, M: float) -> float:
    _check_sigma(sigma)
    return std_normal_cdf((m - M) / sigma)


def happiness_probabilities(instance: BanditInstance, M: float) -> np.ndarray:
    return np.array([happiness_probability(m, s, M) for m, s in zip(instance.means, instance.stds)])


def standardized_mean(m, sigma, M):
    """(m - M) / sigma; accepts scalars or arrays."""
    if np.any(np.asarray(sigma) <= 0):
        raise InvalidArgumentError("sigma must be positive")
    out = (np.asarray(m, dtype=np.float64) - M) / np.asarray(sigma, dtype=np.float64)
    return float(out) if out.ndim == 0 else out


def standardize_reward(r: float, sigma: float, M: float) -> float:
    _check_sigma(sigma)
    return (r - M) / sigma


def thresholded_regret(instance: BanditInstance, M_mean: float, arm: int) -> float:
    arm = instance._check_arm(arm)
    return max(M_mean - float(instance.means[arm]), 0.0)


def thresholded_regrets(instance: BanditInstance, M_mean: float) -> np.ndarray:
    return np.maximum(M_mean - instance.means, 0.0)


def satisfying_set(instance: BanditInstance, M_mean: float) -> tuple[frozenset, int]:
    """Arms with m_i >= M (inclusive) and their count k."""
    if M_mean > instance.best_mean:
        raise InfeasibleObjectiveError(
            f"mean threshold {M_mean} exceeds the best mean {instance.best_mean}")
    arms = frozenset(int(i) for i in np.flatnonzero(instance.means >= M_mean))
    return arms, len(arms)

