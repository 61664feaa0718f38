"""Standard normal primitives: CDF, density, quantile and an Anderson-Darling
test against a fully specified N(0, 1).

Scalar inputs go through a pure-``math`` path (the scorers call these once per
observation, where numpy call overhead dominates); arrays go through numpy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc as _erfc_array

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Rational approximation coefficients (Acklam), relative error < 1.15e-9.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


class DomainError(ValueError):
    """Argument outside the domain of a normal-kernel function."""


def _is_scalar(x) -> bool:
    return isinstance(x, (int, float, np.floating, np.integer))


def phi(z):
    """Standard normal CDF, computed from the complementary error function."""
    if _is_scalar(z):
        z = float(z)
        if not math.isfinite(z):
            raise DomainError(f"phi: non-finite input {z!r}")
        return 0.5 * math.erfc(-z / _SQRT2)
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)):
        raise DomainError("phi: non-finite input")
    return 0.5 * _erfc_array(-z / _SQRT2)


def density(z):
    """Standard normal density."""
    if _is_scalar(z):
        z = float(z)
        return math.exp(-0.5 * z * z) / _SQRT2PI
    z = np.asarray(z, dtype=float)
    return np.exp(-0.5 * z * z) / _SQRT2PI


def _ppf_lower(p: float) -> float:
    # p in (0, 0.5]
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    else:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    # one Newton step on phi(x) = p
    err = 0.5 * math.erfc(-x / _SQRT2) - p
    return x - err * _SQRT2PI * math.exp(0.5 * x * x)


def _ppf_lower_array(p: np.ndarray) -> np.ndarray:
    x = np.empty_like(p)
    tail = p < _P_LOW
    if tail.any():
        q = np.sqrt(-2.0 * np.log(p[tail]))
        x[tail] = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                   / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    mid = ~tail
    if mid.any():
        q = p[mid] - 0.5
        r = q * q
        x[mid] = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
                  / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    err = 0.5 * _erfc_array(-x / _SQRT2) - p
    return x - err * _SQRT2PI * np.exp(0.5 * x * x)


def phi_inverse(p):
    """Standard normal quantile function.

    Accepts a float or an array-like of probabilities, all strictly inside
    (0, 1). The result is exactly odd-symmetric about p = 0.5 whenever
    ``1 - p`` is representable.
    """
    if _is_scalar(p):
        p = float(p)
        if not 0.0 < p < 1.0:
            raise DomainError(f"phi_inverse: p must lie in (0, 1), got {p!r}")
        if p > 0.5:
            return -_ppf_lower(1.0 - p)
        return _ppf_lower(p)
    p = np.asarray(p, dtype=float)
    if not np.all((p > 0.0) & (p < 1.0)):
        raise DomainError("phi_inverse: all p must lie in (0, 1)")
    upper = p > 0.5
    out = _ppf_lower_array(np.where(upper, 1.0 - p, p))
    return np.where(upper, -out, out)


@dataclass(frozen=True)
class AdResult:
    statistic: float
    p_value: float
    n: int


def _ad_limit_cdf(a2: float) -> float:
    """Asymptotic CDF of A^2 for a fully specified null (Marsaglia & Marsaglia, 2004)."""
    if a2 <= 0.0:
        return 0.0
    if a2 < 2.0:
        return (math.exp(-1.2337141 / a2) / math.sqrt(a2)
                * (2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * a2)
                                                       * a2) * a2) * a2) * a2))
    return math.exp(-math.exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * a2)
                                                               * a2) * a2) * a2) * a2))


def anderson_darling_n01(sample) -> AdResult:
    """Anderson-Darling test of ``sample`` against N(0, 1), no estimated parameters.

    Args:
        sample: at least 8 finite values; ties are allowed.

    Returns:
        AdResult with the A^2 statistic and its asymptotic p-value.
    """
    z = np.sort(np.asarray(sample, dtype=float))
    n = z.size
    if n < 8:
        raise ValueError(f"anderson_darling_n01 needs at least 8 values, got {n}")
    if not np.all(np.isfinite(z)):
        raise DomainError("anderson_darling_n01: non-finite value in sample")
    # log Phi(z) and log(1 - Phi(z)) = log Phi(-z), both from erfc to keep the tails
    tiny = np.finfo(float).tiny
    log_cdf = np.log(np.maximum(0.5 * _erfc_array(-z / _SQRT2), tiny))
    log_sf = np.log(np.maximum(0.5 * _erfc_array(z / _SQRT2), tiny))
    i = np.arange(1, n + 1)
    a2 = -n - np.sum((2 * i - 1) * (log_cdf + log_sf[::-1])) / n
    a2 = max(float(a2), 0.0)
    p_value = min(max(1.0 - _ad_limit_cdf(a2), 0.0), 1.0)
    return AdResult(statistic=a2, p_value=p_value, n=int(n))
