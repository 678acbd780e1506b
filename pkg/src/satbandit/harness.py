"""Seeded trial execution and Monte Carlo aggregation."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import belief as bel
from . import kernels
from .environment import BanditInstance, ObjectiveSpec, happiness
from .errors import InvalidArgumentError
from .metrics import BoundCurve, StepRecord, lower_bound_curve, regret_frame, upper_bound_curve
from .policies import EligibleRule, Heuristic, PolicySpec, RobustWrapper, select, ucl_quantile, \
    sufficing_quantile, wrap_robust


@dataclass(frozen=True)
class SimulationConfig:
    instance: BanditInstance
    policy: PolicySpec
    horizon: int
    trials: int = 1
    master_seed: int = 42
    name: str = ""

    def __post_init__(self):
        if int(self.trials) < 1:
            raise InvalidArgumentError("trials must be at least 1")
        if int(self.horizon) < self.instance.n_arms:
            raise InvalidArgumentError(
                f"horizon {self.horizon} is shorter than the {self.instance.n_arms} forced initial pulls")
        if not 0 <= int(self.master_seed) < 2**64:
            raise InvalidArgumentError("master_seed must be an unsigned 64-bit integer")
        self.policy.objective.check_feasible(self.instance)

    @property
    def objective(self) -> ObjectiveSpec:
        return self.policy.objective


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Counter-based stream keyed by a hash of (master_seed, trial)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


def trial_noise(master_seed: int, trial: int, horizon: int) -> np.ndarray:
    """Unit-normal draws consumed one per step: reward_t = m + sigma * z_t."""
    return trial_rng(master_seed, trial).standard_normal(int(horizon))


@dataclass(frozen=True)
class AgentSetup:
    """What the agent learns on, plus the omniscient accounting frame."""

    spec: PolicySpec                      # mean-reward form (problems 1-4)
    noise_stds: np.ndarray                # sampling stds assumed by the belief update
    preprocess: Optional[RobustWrapper]   # raw reward -> standardized reward
    gaps: np.ndarray
    ref_threshold: float
    one_minus_delta: float


def prepare(instance: BanditInstance, policy: PolicySpec) -> AgentSetup:
    obj = policy.objective
    obj.check_feasible(instance)
    if obj.problem.robust:
        spec, wrapper = wrap_robust(policy, instance.stds, obj.happiness_threshold,
                                    means=instance.means)
        noise = wrapper.noise_stds
    else:
        spec = policy if policy.prior is not None else \
            PolicySpec(obj, policy.K, policy.heuristic, policy.zeta,
                       bel.Prior.uninformative(instance.n_arms), policy.eligible_rule)
        spec.prior_for(instance.n_arms)
        wrapper, noise = None, np.asarray(instance.stds)
    gaps, _ = regret_frame(instance, obj)
    _, thr = obj.reference(instance)
    return AgentSetup(spec, noise, wrapper, gaps, thr, 1.0 - obj.delta)


def kernel_eligible(setup: AgentSetup) -> bool:
    return (setup.spec.heuristic is Heuristic.gaussian_known_variance
            and setup.spec.prior.is_diagonal)


def kernel_params(instance: BanditInstance, setup: AgentSetup, horizon: int,
                  happy_threshold: Optional[float]) -> kernels.KernelParams:
    spec = setup.spec
    prior = spec.prior
    lam0 = np.ascontiguousarray(np.diag(prior.precision0), dtype=np.float64)
    if spec.problem.sufficing:
        divisor = 3 if spec.problem.thresholded else 2
        qs = np.full(horizon, sufficing_quantile(spec.objective.delta, divisor))
    else:
        qs = np.array([ucl_quantile(t, spec.K) for t in range(1, horizon + 1)])
    if not spec.problem.thresholded:
        mode, thr = kernels.MODE_ARGMAX, 0.0
    else:
        mode = (kernels.MODE_ELIGIBLE_STICKY if spec.eligible_rule is EligibleRule.sticky
                else kernels.MODE_ELIGIBLE_MAXQ)
        thr = float(spec.objective.mean_threshold)
    wrap = setup.preprocess
    return kernels.KernelParams(
        means=np.ascontiguousarray(instance.means),
        stds=np.ascontiguousarray(instance.stds),
        shift=wrap.M if wrap is not None else 0.0,
        scale=np.ascontiguousarray(wrap.stds if wrap is not None else np.ones(instance.n_arms)),
        noise_std=np.ascontiguousarray(setup.noise_stds, dtype=np.float64),
        lam0=lam0,
        q0=np.ascontiguousarray(prior.precision0 @ prior.mu0, dtype=np.float64),
        quantiles=qs,
        mode=mode,
        threshold=thr,
        gaps=np.ascontiguousarray(setup.gaps, dtype=np.float64),
        ref_threshold=setup.ref_threshold,
        one_minus_delta=setup.one_minus_delta,
        happy_threshold=happy_threshold if happy_threshold is not None else 0.0,
        track_happy=happy_threshold is not None,
    )


def simulate_reference(instance: BanditInstance, setup: AgentSetup, z: np.ndarray,
                       happy_threshold: Optional[float] = None,
                       reward_fn: Optional[Callable[[int, float], float]] = None) -> kernels.TrialArrays:
    """One trial through the belief/policy objects, step by step.

    ``reward_fn(arm, z_t)`` overrides Gaussian sampling (used for
    bounded-support checks of the UCB1 heuristic).
    """
    T = z.size
    out = kernels.TrialArrays.empty(1, T)
    state = bel.init(setup.spec.prior, setup.noise_stds)
    prev = None
    for t in range(1, T + 1):
        d = select(state, t, setup.spec, prev)
        a = d.arm
        conf = bel.satisfaction_confidence(state, a, setup.ref_threshold)
        if reward_fn is None:
            r = float(instance.means[a] + instance.stds[a] * z[t - 1])
        else:
            r = float(reward_fn(a, z[t - 1]))
        g = setup.gaps[a]
        out.arms[0, t - 1] = a
        out.rewards[0, t - 1] = r
        out.confidence[0, t - 1] = conf
        out.regret_omniscient[0, t - 1] = g
        out.regret[0, t - 1] = g if conf <= setup.one_minus_delta else 0.0
        if happy_threshold is not None:
            out.happy[0, t - 1] = happiness(r, happy_threshold)
        x = setup.preprocess(a, r) if setup.preprocess is not None else r
        bel.update(state, a, x, float(setup.noise_stds[a]))
        prev = a
    return out


def _run_block(config: SimulationConfig, trial_ids: range, engine: str,
               backend: str) -> kernels.TrialArrays:
    setup = prepare(config.instance, config.policy)
    M = config.objective.happiness_threshold
    Z = np.stack([trial_noise(config.master_seed, k, config.horizon) for k in trial_ids])
    use_kernel = engine == "kernel" or (engine == "auto" and kernel_eligible(setup))
    if use_kernel:
        if not kernel_eligible(setup):
            raise InvalidArgumentError("the kernel engine needs a Gaussian heuristic and a diagonal prior")
        params = kernel_params(config.instance, setup, config.horizon, M)
        return kernels.run_trials(Z, params, backend)
    if engine not in ("auto", "reference"):
        raise InvalidArgumentError(f"unknown engine {engine!r}")
    return kernels.TrialArrays.concat(
        [simulate_reference(config.instance, setup, z, M) for z in Z])


def run_trial(config: SimulationConfig, trial_index: int, engine: str = "auto",
              backend: str = "auto") -> list[StepRecord]:
    arr = _run_block(config, range(trial_index, trial_index + 1), engine, backend)
    sw = arr.switched[0]
    return [
        StepRecord(t=t + 1, arm=int(arr.arms[0, t]), reward=float(arr.rewards[0, t]),
                   regret=float(arr.regret[0, t]), happy=int(arr.happy[0, t]),
                   switched=int(sw[t]), confidence=float(arr.confidence[0, t]),
                   regret_omniscient=float(arr.regret_omniscient[0, t]))
        for t in range(config.horizon)
    ]


@dataclass
class AggregateResult:
    config: SimulationConfig
    t: np.ndarray
    mean_cum_regret: np.ndarray
    se_regret: np.ndarray
    mean_cum_regret_omniscient: np.ndarray
    mean_cum_reward: np.ndarray
    mean_cum_happiness: Optional[np.ndarray]
    mean_cum_switches: np.ndarray
    mean_pulls: np.ndarray
    pulls: np.ndarray                 # (trials, N) final pull counts
    last_regret_step: np.ndarray      # per trial, last step charged satisficing regret (0 if none)
    arms: np.ndarray = field(repr=False)
    bounds: list[BoundCurve] = field(default_factory=list)

    @property
    def upper_bound(self) -> Optional[BoundCurve]:
        return next((b for b in self.bounds if b.kind == "upper"), None)

    def nonsatisfying_pulls(self) -> np.ndarray:
        """Per-trial pulls of arms with a positive thresholded gap, shape (trials, N)."""
        gaps, _ = regret_frame(self.config.instance, self.config.objective)
        return np.where(gaps > 0, self.pulls, 0)


def aggregate(config: SimulationConfig, arr: kernels.TrialArrays) -> AggregateResult:
    trials, T = arr.arms.shape
    n = config.instance.n_arms
    cum_regret = np.cumsum(arr.regret, axis=1)
    se = (np.std(cum_regret, axis=0, ddof=1) / math.sqrt(trials)) if trials > 1 else np.zeros(T)
    pulls = np.stack([np.bincount(row, minlength=n) for row in arr.arms])
    charged = arr.regret > 0
    last = np.where(charged.any(axis=1), T - np.argmax(charged[:, ::-1], axis=1), 0)
    t = np.arange(1, T + 1)
    happy = None
    if config.objective.happiness_threshold is not None:
        happy = np.cumsum(arr.happy, axis=1, dtype=np.float64).mean(axis=0)
    return AggregateResult(
        config=config,
        t=t,
        mean_cum_regret=cum_regret.mean(axis=0),
        se_regret=se,
        mean_cum_regret_omniscient=np.cumsum(arr.regret_omniscient, axis=1).mean(axis=0),
        mean_cum_reward=np.cumsum(arr.rewards, axis=1).mean(axis=0),
        mean_cum_happiness=happy,
        mean_cum_switches=np.cumsum(arr.switched, axis=1, dtype=np.float64).mean(axis=0),
        mean_pulls=pulls.mean(axis=0),
        pulls=pulls,
        last_regret_step=last,
        arms=arr.arms,
        bounds=bound_overlays(config, t),
    )


def bound_overlays(config: SimulationConfig, horizons) -> list[BoundCurve]:
    obj = config.objective
    return [upper_bound_curve(config.instance, obj, horizons),
            lower_bound_curve(config.instance, obj, horizons)]


def _chunks(trials: int, jobs: int) -> list[range]:
    jobs = max(1, min(int(jobs), trials))
    edges = np.linspace(0, trials, jobs + 1).astype(int)
    return [range(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_monte_carlo(config: SimulationConfig, jobs: int = 1, engine: str = "auto",
                    backend: str = "auto") -> AggregateResult:
    """Run ``config.trials`` seeded trials and reduce them in trial order.

    Trials are split into contiguous blocks over ``jobs`` worker threads; the
    result does not depend on ``jobs``.
    """
    blocks = _chunks(config.trials, jobs)
    if len(blocks) == 1:
        parts = [_run_block(config, blocks[0], engine, backend)]
    else:
        with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
            parts = list(pool.map(lambda b: _run_block(config, b, engine, backend), blocks))
    return aggregate(config, kernels.TrialArrays.concat(parts))
