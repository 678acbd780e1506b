"""Standard-normal CDF and quantile, plus the Gaussian tail bounds.

The scalar kernels ``ndtr`` and ``ndtri`` are numba-compilable and carry no
argument checking; the public ``std_normal_*`` functions validate inputs.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit
from .errors import InvalidArgumentError

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation to the normal quantile (rel. error ~1.2e-9).
_A0, _A1, _A2, _A3, _A4, _A5 = (
    -3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
    1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00,
)
_B0, _B1, _B2, _B3, _B4 = (
    -5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
    6.680131188771972e01, -1.328068155288572e01,
)
_C0, _C1, _C2, _C3, _C4, _C5 = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
    -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00,
)
_D0, _D1, _D2, _D3 = (
    7.784695709041462e-03, 3.224671290700398e-01,
    2.445134137142996e00, 3.754408661907416e00,
)
_P_LOW = 0.02425


@njit(cache=True)
def ndtr(z):
    """Phi(z) through the complementary error function."""
    return 0.5 * math.erfc(-z / _SQRT2)


@njit(cache=True)
def _ndtri_lower(p):
    # 0 < p <= 0.5
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C0 * q + _C1) * q + _C2) * q + _C3) * q + _C4) * q + _C5) / (
            (((_D0 * q + _D1) * q + _D2) * q + _D3) * q + 1.0
        )
    else:
        q = p - 0.5
        r = q * q
        x = (((((_A0 * r + _A1) * r + _A2) * r + _A3) * r + _A4) * r + _A5) * q / (
            ((((_B0 * r + _B1) * r + _B2) * r + _B3) * r + _B4) * r + 1.0
        )
    if x == 0.0:
        return x
    # one Halley refinement against the erfc-based CDF
    e = 0.5 * math.erfc(-x / _SQRT2) - p
    u = e * _SQRT2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


@njit(cache=True)
def ndtri(p):
    """Phi^{-1}(p); -inf at 0, +inf at 1, nan outside [0, 1]."""
    if not (p >= 0.0 and p <= 1.0):
        return math.nan
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return math.inf
    if p <= 0.5:
        return _ndtri_lower(p)
    return -_ndtri_lower(1.0 - p)


def std_normal_cdf(z: float) -> float:
    if not math.isfinite(z):
        raise InvalidArgumentError(f"std_normal_cdf needs a finite argument, got {z!r}")
    return float(ndtr(float(z)))


def std_normal_quantile(p: float) -> float:
    """Quantile of N(0, 1). ``p`` of exactly 0 or 1 maps to -inf / +inf."""
    if not (0.0 <= p <= 1.0):
        raise InvalidArgumentError(f"probability must lie in [0, 1], got {p!r}")
    return float(ndtri(float(p)))


def quantile_upper_bound(alpha: float) -> float:
    """sqrt(-2 ln alpha), an upper bound on Phi^{-1}(1 - alpha) for alpha in [0.5, 1]."""
    if not (alpha > 0.0) or alpha > 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1], got {alpha!r}")
    return math.sqrt(-2.0 * math.log(alpha))


def tail_probability_bounds(w: float) -> tuple[float, float]:
    """The two upper bounds on Pr{z >= w} for w >= 0: the sharp one and exp(-w^2/2)/2."""
    if w < 0:
        raise InvalidArgumentError("w must be nonnegative")
    g = math.exp(-0.5 * w * w)
    sharp = 2.0 * g / (_SQRT2PI * (w + math.sqrt(w * w + 8.0 / math.pi)))
    return sharp, 0.5 * g


def ndtr_array(z: np.ndarray) -> np.ndarray:
    """Elementwise Phi for the vectorized numpy path."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    flat_in, flat_out = z.ravel(), out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = 0.5 * math.erfc(-flat_in[i] / _SQRT2)
    return out
