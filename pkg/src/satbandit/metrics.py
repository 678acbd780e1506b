"""Regret accounting and theoretical bound curves."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .environment import BanditInstance, ObjectiveSpec, Problem
from .errors import InvalidArgumentError
from .gaussian_stats import std_normal_quantile

PAC_CONSTANT = 18375.0


@dataclass(frozen=True)
class StepRecord:
    t: int
    arm: int
    reward: float
    regret: float
    happy: int
    switched: int
    confidence: float
    regret_omniscient: float = 0.0


@dataclass(frozen=True)
class BoundCurve:
    label: str
    horizons: np.ndarray
    values: np.ndarray
    kind: str  # "upper" or "lower"

    def at(self, T: int) -> float:
        idx = np.searchsorted(self.horizons, T)
        if idx >= self.horizons.size or self.horizons[idx] != T:
            raise KeyError(T)
        return float(self.values[idx])

    def as_dict(self) -> dict:
        return {int(h): float(v) for h, v in zip(self.horizons, self.values)}


class BoundFamily(str, enum.Enum):
    # log: grows like ln T; const: horizon-free. best: gap to the optimum; threshold: gap to M
    log_best = "log_best"
    log_threshold = "log_threshold"
    const_best = "const_best"
    const_threshold = "const_threshold"


def satisficing_regret_step(instance: BanditInstance, objective: ObjectiveSpec,
                            arm: int, confidence: float) -> float:
    """Expected satisficing regret of one pull.

    The thresholded gap of ``arm`` is charged only when the agent's
    confidence of being satisfied is at most 1 - delta.
    """
    instance._check_arm(arm)
    values, thr = objective.reference(instance)
    gap = max(thr - float(values[arm]), 0.0)
    if confidence <= 1.0 - objective.delta:
        return gap
    return 0.0


def accumulate(records: Sequence[StepRecord]) -> dict[str, np.ndarray]:
    """Prefix sums of regret, reward, happiness and switches."""
    ts = [r.t for r in records]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise InvalidArgumentError("records must be ordered by strictly increasing t")
    def cum(attr):
        return np.cumsum(np.array([getattr(r, attr) for r in records], dtype=np.float64))
    return {
        "regret": cum("regret"),
        "reward": cum("reward"),
        "happiness": cum("happy"),
        "switches": cum("switched"),
    }


def kl_gaussian(m1: float, s1: float, m2: float, s2: float) -> float:
    """KL(N(m1, s1^2) || N(m2, s2^2))."""
    if not (s1 > 0 and s2 > 0):
        raise InvalidArgumentError("standard deviations must be positive")
    ratio = (s1 * s1) / (s2 * s2)
    d = m2 - m1
    return 0.5 * (d * d / (s2 * s2) + ratio - 1.0 - math.log(ratio))


def lower_bound_lai_robbins(instance: BanditInstance, arm: int, T: float, k: int = 1) -> float:
    """Leading term ln(T) / KL(arm || k-th best arm) of the asymptotic pull bound."""
    arm = instance._check_arm(arm)
    if T < 2:
        raise InvalidArgumentError("horizon must be at least 2")
    ref = int(instance.order()[k - 1])
    if instance.means[arm] >= instance.means[ref]:
        raise InvalidArgumentError(f"arm {arm} is not among the {k}-worst arms")
    d = kl_gaussian(instance.means[arm], instance.stds[arm], instance.means[ref], instance.stds[ref])
    return math.log(T) / d


def lower_bound_pac(N: int, k: int, epsilon: float, delta: float) -> float:
    """Worst-case Explore-k sample complexity, N ln(k / 8 delta) / (18375 eps^2)."""
    if not epsilon > 0:
        raise InvalidArgumentError("epsilon must be positive")
    if not 0 < delta < 1:
        raise InvalidArgumentError("delta must lie in (0, 1)")
    return N / (PAC_CONSTANT * epsilon * epsilon) * math.log(k / (8.0 * delta))


def lower_bound_explore1(epsilon: float, delta: float) -> float:
    """Order-level Explore-1 curve ln(1/delta) / eps^2."""
    if not epsilon > 0 or not 0 < delta < 1:
        raise InvalidArgumentError("need epsilon > 0 and delta in (0, 1)")
    return math.log(1.0 / delta) / (epsilon * epsilon)


_FAMILY = {
    Problem.P1_standard: BoundFamily.log_best,
    Problem.P2_satisfaction_mean: BoundFamily.log_threshold,
    Problem.P3_delta_sufficing: BoundFamily.const_best,
    Problem.P4_M_delta_satisficing: BoundFamily.const_threshold,
}


def bound_family(problem: Problem) -> BoundFamily:
    return _FAMILY[Problem.parse(problem).mean_counterpart]


def regret_frame(instance: BanditInstance, objective: ObjectiveSpec) -> tuple[np.ndarray, np.ndarray]:
    """(per-arm thresholded gaps, per-arm sampling stds) on the scale regret is counted in.

    Robust problems live on the standardized instance, which has unit noise.
    """
    values, thr = objective.reference(instance)
    stds = np.ones(instance.n_arms) if objective.problem.robust else np.asarray(instance.stds)
    return np.maximum(thr - values, 0.0), stds


def pull_bounds(family: BoundFamily, gaps: np.ndarray, stds: np.ndarray, T: float,
                delta: float = 0.0) -> np.ndarray:
    """Per-arm bound on pulls of regret-incurring arms; 0 for arms with zero gap."""
    family = BoundFamily(family)
    gaps = np.asarray(gaps, dtype=np.float64)
    var = np.asarray(stds, dtype=np.float64) ** 2
    out = np.zeros_like(gaps)
    pos = gaps > 0
    g2 = gaps[pos] ** 2
    if family is BoundFamily.log_best:
        out[pos] = (8.0 * var[pos] / g2 + 2.0) * math.log(T) + 3.0
    elif family is BoundFamily.log_threshold:
        out[pos] = (8.0 * var[pos] / g2 + 3.0) * math.log(T) + 4.0
    else:
        divisor = 2 if family is BoundFamily.const_best else 3
        if not 0 < delta <= 1:
            raise InvalidArgumentError(f"{family.value} needs delta in (0, 1]")
        z = std_normal_quantile(1.0 - delta / divisor)
        out[pos] = 4.0 * var[pos] / g2 * z * z + 1.0
    return out


def upper_bound(family, instance: BanditInstance, objective: ObjectiveSpec, T: float) -> float:
    """Regret upper bound sum_i gap_i * pull_bound_i at horizon T."""
    family = BoundFamily(family)
    if T < 1:
        raise InvalidArgumentError("horizon must be at least 1")
    if bound_family(objective.problem) is not family:
        raise InvalidArgumentError(
            f"{family.value} does not apply to problem {objective.problem.value}")
    gaps, stds = regret_frame(instance, objective)
    return float(np.sum(gaps * pull_bounds(family, gaps, stds, T, objective.delta)))


def upper_bound_curve(instance: BanditInstance, objective: ObjectiveSpec,
                      horizons: Iterable[int]) -> BoundCurve:
    family = bound_family(objective.problem)
    hs = np.asarray(list(horizons), dtype=np.int64)
    gaps, stds = regret_frame(instance, objective)
    vals = np.array([float(np.sum(gaps * pull_bounds(family, gaps, stds, h, objective.delta)))
                     for h in hs])
    return BoundCurve(f"{family.value} upper", hs, vals, "upper")


def lower_bound_curve(instance: BanditInstance, objective: ObjectiveSpec,
                      horizons: Iterable[int]) -> BoundCurve:
    """Asymptotic lower bound on cumulative regret (o(1) terms dropped).

    delta = 0 problems use the KL bound against the k-th best arm. delta > 0
    problems report the constant Explore-k sample-complexity bound (in pulls)
    with epsilon taken as the smallest positive gap.
    """
    hs = np.asarray(list(horizons), dtype=np.int64)
    p = objective.problem
    inst = instance.standardized(objective.happiness_threshold) if p.robust else instance
    gaps, _ = regret_frame(instance, objective)
    values, thr = objective.reference(instance)
    k = max(int(np.sum(values >= thr)), 1)
    if not p.sufficing:
        ref = int(inst.order()[k - 1])
        coef = 0.0
        for i in np.flatnonzero(gaps > 0):
            if inst.means[i] < inst.means[ref]:
                coef += gaps[i] / kl_gaussian(inst.means[i], inst.stds[i],
                                              inst.means[ref], inst.stds[ref])
        vals = np.array([coef * math.log(h) if h >= 2 else 0.0 for h in hs])
        label = "asymptotic lower (KL)"
    else:
        pos = gaps[gaps > 0]
        if pos.size == 0 or objective.delta >= 1.0:
            vals = np.zeros(hs.size)
        else:
            eps = float(pos.min())
            bound = max(lower_bound_pac(inst.n_arms, k, eps, objective.delta), 0.0)
            vals = np.full(hs.size, bound)
        label = "asymptotic lower (PAC pulls)"
    return BoundCurve(label, hs, vals, "lower")
