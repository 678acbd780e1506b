"""Conjugate Gaussian beliefs over the vector of arm means.

The belief is kept in information form: precision ``Lambda`` and the
information vector ``q = Lambda mu``. Each observation adds a rank-one term
on the diagonal, so diagonal priors stay diagonal and are solved elementwise.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .gaussian_stats import ndtr

_JITTER = 1e-12


class PriorKind(str, enum.Enum):
    informative = "informative"
    uncorrelated = "uncorrelated"
    uninformative = "uninformative"


@dataclass(frozen=True)
class Prior:
    mu0: np.ndarray
    precision0: np.ndarray
    kind: PriorKind

    def __post_init__(self):
        mu0 = np.array(self.mu0, dtype=np.float64).reshape(-1)
        lam = np.array(self.precision0, dtype=np.float64)
        kind = PriorKind(self.kind)
        if lam.shape != (mu0.size, mu0.size):
            raise InvalidArgumentError(f"precision shape {lam.shape} does not match {mu0.size} arms")
        if not np.allclose(lam, lam.T, rtol=0.0, atol=1e-12):
            raise InvalidArgumentError("prior precision must be symmetric")
        lam = 0.5 * (lam + lam.T)
        if kind is PriorKind.uninformative and np.any(lam != 0.0):
            raise InvalidArgumentError("an uninformative prior has zero precision")
        if kind is PriorKind.uncorrelated and np.any(lam != np.diag(np.diag(lam))):
            raise InvalidArgumentError("an uncorrelated prior needs a diagonal precision")
        if kind is not PriorKind.uninformative:
            try:
                np.linalg.cholesky(lam)
            except np.linalg.LinAlgError as exc:
                raise InvalidArgumentError("informative prior precision must be positive definite") from exc
        mu0.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "precision0", lam)
        object.__setattr__(self, "kind", kind)

    @classmethod
    def uninformative(cls, n_arms: int) -> "Prior":
        return cls(np.zeros(n_arms), np.zeros((n_arms, n_arms)), PriorKind.uninformative)

    @classmethod
    def uncorrelated(cls, mu0, var0) -> "Prior":
        mu0 = np.asarray(mu0, dtype=np.float64).reshape(-1)
        var0 = np.broadcast_to(np.asarray(var0, dtype=np.float64), mu0.shape)
        if np.any(var0 <= 0):
            raise InvalidArgumentError("prior variances must be positive")
        return cls(mu0, np.diag(1.0 / var0), PriorKind.uncorrelated)

    @classmethod
    def informative(cls, mu0, cov0) -> "Prior":
        cov0 = np.asarray(cov0, dtype=np.float64)
        if not np.allclose(cov0, cov0.T, rtol=0.0, atol=1e-12):
            raise InvalidArgumentError("prior covariance must be symmetric")
        try:
            np.linalg.cholesky(cov0)
        except np.linalg.LinAlgError as exc:
            raise InvalidArgumentError("prior covariance must be positive definite") from exc
        return cls(mu0, np.linalg.inv(cov0), PriorKind.informative)

    @property
    def n_arms(self) -> int:
        return int(self.mu0.size)

    @property
    def is_diagonal(self) -> bool:
        lam = self.precision0
        return bool(np.all(lam == np.diag(np.diag(lam))))

    def covariance(self) -> np.ndarray:
        """Sigma_0; infinite on the diagonal of zero-precision arms."""
        if self.kind is PriorKind.uninformative:
            return np.diag(np.full(self.n_arms, np.inf))
        return np.linalg.inv(self.precision0)


def transform_prior_standardized(prior: Prior, stds, M: float) -> Prior:
    """Prior on m -> prior on x = (m - M) / sigma.

    Covariances scale as Sigma_ij / (sigma_i sigma_j), so precisions scale as
    Lambda_ij * sigma_i * sigma_j and zero precision stays zero.
    """
    stds = np.asarray(stds, dtype=np.float64).reshape(-1)
    if stds.size != prior.n_arms or np.any(stds <= 0):
        raise InvalidArgumentError("stds must be positive and match the prior dimension")
    mu = (prior.mu0 - M) / stds
    lam = prior.precision0 * np.outer(stds, stds)
    return Prior(mu, lam, prior.kind)


@dataclass
class BeliefState:
    """Posterior over arm means; mutated in place by :func:`update`."""

    mu: np.ndarray
    precision: np.ndarray
    pulls: np.ndarray
    q_accum: np.ndarray
    sq_accum: np.ndarray
    reward_sum: np.ndarray
    diagonal: bool
    _cov_diag: np.ndarray = field(default=None, repr=False)

    @property
    def n_arms(self) -> int:
        return int(self.mu.size)

    def variances(self) -> np.ndarray:
        """Marginal posterior variances; inf for arms with no information."""
        return self._cov_diag

    def empirical_means(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.pulls > 0, self.reward_sum / np.maximum(self.pulls, 1), np.nan)

    def covariance(self) -> np.ndarray:
        if self.diagonal:
            return np.diag(self._cov_diag)
        support = np.diag(self.precision) > 0
        cov = np.full_like(self.precision, np.nan)
        idx = np.flatnonzero(support)
        cov[np.ix_(idx, idx)] = _spd_inverse(self.precision[np.ix_(idx, idx)])
        cov[~support, ~support] = np.inf
        return cov

    def _refresh(self) -> None:
        if self.diagonal:
            lam = np.diag(self.precision)
            with np.errstate(divide="ignore", invalid="ignore"):
                self.mu = np.where(lam > 0, self.q_accum / lam, np.nan)
                self._cov_diag = np.where(lam > 0, 1.0 / lam, np.inf)
            return
        support = np.diag(self.precision) > 0
        idx = np.flatnonzero(support)
        mu = np.full(self.n_arms, np.nan)
        var = np.full(self.n_arms, np.inf)
        if idx.size:
            block = self.precision[np.ix_(idx, idx)]
            cov = _spd_inverse(block)
            mu[idx] = _spd_solve(block, self.q_accum[idx])
            var[idx] = np.diag(cov)
        self.mu = mu
        self._cov_diag = var


def _cholesky(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return np.linalg.cholesky(a + _JITTER * np.eye(a.shape[0]))


def _spd_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    L = _cholesky(a)
    y = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, y)


def _spd_inverse(a: np.ndarray) -> np.ndarray:
    L = _cholesky(a)
    Linv = np.linalg.solve(L, np.eye(a.shape[0]))
    return Linv.T @ Linv


def init(prior: Prior, stds=None) -> BeliefState:
    n = prior.n_arms
    if stds is not None and np.asarray(stds).reshape(-1).size != n:
        raise InvalidArgumentError(f"prior has {n} arms but {np.asarray(stds).size} stds were given")
    state = BeliefState(
        mu=prior.mu0.copy(),
        precision=prior.precision0.copy(),
        pulls=np.zeros(n, dtype=np.int64),
        q_accum=prior.precision0 @ prior.mu0,
        sq_accum=np.zeros(n),
        reward_sum=np.zeros(n),
        diagonal=prior.is_diagonal,
    )
    state._refresh()
    return state


def update(state: BeliefState, arm: int, reward: float, sigma_s: float) -> BeliefState:
    """Fold one observation into the belief (in place) and return it."""
    if not 0 <= arm < state.n_arms:
        raise InvalidArgumentError(f"arm {arm} out of range")
    if not sigma_s > 0:
        raise InvalidArgumentError("sampling std must be positive")
    w = 1.0 / (sigma_s * sigma_s)
    state.q_accum[arm] += reward * w
    state.precision[arm, arm] += w
    state.pulls[arm] += 1
    state.sq_accum[arm] += reward * reward
    state.reward_sum[arm] += reward
    state._refresh()
    return state


def marginal(state: BeliefState, arm: int) -> tuple[float, float]:
    """(posterior mean, posterior std); (nan, inf) for an arm with no information."""
    var = state.variances()[arm]
    if math.isinf(var):
        return math.nan, math.inf
    return float(state.mu[arm]), math.sqrt(var)


def satisfaction_confidence(state: BeliefState, arm: int, M_mean: float) -> float:
    """Posterior probability that arm's mean is at least ``M_mean``.

    Arms with no information return 0.5.
    """
    mean, std = marginal(state, arm)
    if math.isinf(std):
        return 0.5
    if std == 0.0:
        return 1.0 if mean >= M_mean else 0.0
    return float(ndtr((mean - M_mean) / std))
