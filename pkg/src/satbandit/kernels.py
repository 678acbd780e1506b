"""Hot loops for Gaussian known-variance policies with diagonal priors.

Two implementations of the same trial recursion:

* ``run_trials_numba``: one compiled scalar loop per trial.
* ``run_trials_numpy``: all trials advanced together, vectorized per step.

Both consume a pre-drawn ``(trials, T)`` matrix of unit-normal noise and use
the same floating-point operation order as :mod:`satbandit.belief` and
:mod:`satbandit.policies`, so arm sequences agree exactly across paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from ._accel import njit
from .gaussian_stats import ndtr, ndtr_array

MODE_ARGMAX = 0
MODE_ELIGIBLE_MAXQ = 1
MODE_ELIGIBLE_STICKY = 2


@dataclass(frozen=True)
class KernelParams:
    means: np.ndarray          # true arm means (raw scale)
    stds: np.ndarray           # true sampling stds (raw scale)
    shift: float               # agent sees (r - shift) / scale[arm]
    scale: np.ndarray
    noise_std: np.ndarray      # sampling std the agent assumes per arm
    lam0: np.ndarray           # diagonal prior precision
    q0: np.ndarray             # prior information vector Lambda_0 mu_0
    quantiles: np.ndarray      # per-step credibility quantile, length T
    mode: int
    threshold: float           # eligibility threshold (modes 1, 2)
    gaps: np.ndarray           # per-arm regret if charged
    ref_threshold: float       # threshold for the agent's satisfaction confidence
    one_minus_delta: float
    happy_threshold: float
    track_happy: bool


@dataclass
class TrialArrays:
    arms: np.ndarray
    rewards: np.ndarray
    regret: np.ndarray
    regret_omniscient: np.ndarray
    happy: np.ndarray
    confidence: np.ndarray

    @property
    def switched(self) -> np.ndarray:
        sw = np.zeros(self.arms.shape, dtype=np.int8)
        sw[:, 1:] = self.arms[:, 1:] != self.arms[:, :-1]
        return sw

    @classmethod
    def empty(cls, trials: int, T: int) -> "TrialArrays":
        return cls(
            arms=np.zeros((trials, T), dtype=np.int64),
            rewards=np.zeros((trials, T)),
            regret=np.zeros((trials, T)),
            regret_omniscient=np.zeros((trials, T)),
            happy=np.zeros((trials, T), dtype=np.int8),
            confidence=np.zeros((trials, T)),
        )

    @classmethod
    def concat(cls, parts: list["TrialArrays"]) -> "TrialArrays":
        return cls(*(np.concatenate([getattr(p, f) for p in parts], axis=0)
                     for f in ("arms", "rewards", "regret", "regret_omniscient",
                               "happy", "confidence")))


@njit(cache=True, nogil=True)
def _trial_loop(z, means, stds, shift, scale, noise_std, lam0, q0, quantiles, mode,
                threshold, gaps, ref_threshold, one_minus_delta, happy_threshold,
                track_happy, arms, rewards, regret, regret_omni, happy, confidence):
    n = means.shape[0]
    T = z.shape[0]
    lam = lam0.copy()
    q = q0.copy()
    mu = np.empty(n)
    std = np.empty(n)
    Q = np.empty(n)
    prev = -1
    for t in range(T):
        zq = quantiles[t]
        forced = -1
        for i in range(n):
            if lam[i] > 0.0:
                mu[i] = q[i] / lam[i]
                std[i] = math.sqrt(1.0 / lam[i])
                Q[i] = mu[i] + std[i] * zq
            else:
                mu[i] = math.nan
                std[i] = math.inf
                Q[i] = math.inf
                if forced < 0:
                    forced = i
        if forced >= 0:
            a = forced
        else:
            best = 0
            for i in range(1, n):
                if Q[i] > Q[best]:
                    best = i
            a = best
            if mode != MODE_ARGMAX:
                best_el = -1
                for i in range(n):
                    if Q[i] >= threshold:
                        if best_el < 0 or Q[i] > Q[best_el]:
                            best_el = i
                if best_el >= 0:
                    a = best_el
                    if mode == MODE_ELIGIBLE_STICKY and prev >= 0 and Q[prev] >= threshold:
                        a = prev
        if lam[a] > 0.0:
            conf = ndtr((mu[a] - ref_threshold) / std[a])
        else:
            conf = 0.5
        r = means[a] + stds[a] * z[t]
        g = gaps[a]
        arms[t] = a
        rewards[t] = r
        confidence[t] = conf
        regret_omni[t] = g
        regret[t] = g if conf <= one_minus_delta else 0.0
        if track_happy:
            happy[t] = 1 if r >= happy_threshold else 0
        x = (r - shift) / scale[a]
        w = 1.0 / (noise_std[a] * noise_std[a])
        q[a] += x * w
        lam[a] += w
        prev = a


@njit(cache=True, nogil=True)
def _trials_numba(Z, means, stds, shift, scale, noise_std, lam0, q0, quantiles, mode,
                  threshold, gaps, ref_threshold, one_minus_delta, happy_threshold,
                  track_happy, arms, rewards, regret, regret_omni, happy, confidence):
    for k in range(Z.shape[0]):
        _trial_loop(Z[k], means, stds, shift, scale, noise_std, lam0, q0, quantiles, mode,
                    threshold, gaps, ref_threshold, one_minus_delta, happy_threshold,
                    track_happy, arms[k], rewards[k], regret[k], regret_omni[k],
                    happy[k], confidence[k])


def run_trials_numba(Z: np.ndarray, p: KernelParams) -> TrialArrays:
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    out = TrialArrays.empty(*Z.shape)
    _trials_numba(Z, p.means, p.stds, float(p.shift), p.scale, p.noise_std, p.lam0, p.q0,
                  p.quantiles, int(p.mode), float(p.threshold), p.gaps, float(p.ref_threshold),
                  float(p.one_minus_delta), float(p.happy_threshold), bool(p.track_happy),
                  out.arms, out.rewards, out.regret, out.regret_omniscient, out.happy,
                  out.confidence)
    return out


def run_trials_numpy(Z: np.ndarray, p: KernelParams) -> TrialArrays:
    Z = np.asarray(Z, dtype=np.float64)
    trials, T = Z.shape
    out = TrialArrays.empty(trials, T)
    rows = np.arange(trials)
    lam = np.tile(p.lam0, (trials, 1))
    q = np.tile(p.q0, (trials, 1))
    prev = np.full(trials, -1, dtype=np.int64)
    for t in range(T):
        known = lam > 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            mu = np.where(known, q / lam, np.nan)
            std = np.where(known, np.sqrt(1.0 / lam), np.inf)
            Q = np.where(known, mu + std * p.quantiles[t], np.inf)
        a = np.argmax(Q, axis=1)
        if p.mode != MODE_ARGMAX:
            elig = Q >= p.threshold
            has = elig.any(axis=1)
            best_el = np.argmax(np.where(elig, Q, -np.inf), axis=1)
            a = np.where(has, best_el, a)
            if p.mode == MODE_ELIGIBLE_STICKY:
                keep = has & (prev >= 0) & elig[rows, np.maximum(prev, 0)]
                a = np.where(keep, prev, a)
        unknown = ~known
        a = np.where(unknown.any(axis=1), np.argmax(unknown, axis=1), a)

        ka = known[rows, a]
        with np.errstate(invalid="ignore"):
            zscore = (mu[rows, a] - p.ref_threshold) / std[rows, a]
        conf = np.where(ka, ndtr_array(np.where(ka, zscore, 0.0)), 0.5)
        r = p.means[a] + p.stds[a] * Z[:, t]
        g = p.gaps[a]
        out.arms[:, t] = a
        out.rewards[:, t] = r
        out.confidence[:, t] = conf
        out.regret_omniscient[:, t] = g
        out.regret[:, t] = np.where(conf <= p.one_minus_delta, g, 0.0)
        if p.track_happy:
            out.happy[:, t] = r >= p.happy_threshold
        x = (r - p.shift) / p.scale[a]
        w = 1.0 / (p.noise_std[a] * p.noise_std[a])
        q[rows, a] += x * w
        lam[rows, a] += w
        prev = a
    return out


def run_trials(Z: np.ndarray, p: KernelParams, backend: str = "auto") -> TrialArrays:
    """Dispatch to the numba or numpy kernel.

    ``backend="auto"`` follows ``SATBANDIT_DISABLE_NUMBA``.
    """
    if backend == "auto":
        backend = "numba" if _accel.USE_NUMBA else "numpy"
    if backend == "numba":
        return run_trials_numba(Z, p)
    if backend == "numpy":
        return run_trials_numpy(Z, p)
    raise ValueError(f"unknown backend {backend!r}")
