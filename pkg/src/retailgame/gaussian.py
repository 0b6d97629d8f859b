"""Scalar Gaussian mathematics used by the retailer model.

All functions treat a zero variance as a point mass instead of rejecting it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInputError

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Acklam's rational approximation to the normal quantile (rel. error ~1.2e-9).
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


@dataclass(frozen=True)
class GaussianDist:
    """Normal distribution given by mean (kWh) and variance (kWh^2)."""

    mean: float
    variance: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise InvalidInputError(f"non-finite Gaussian parameters {self}")
        if self.variance < 0:
            raise InvalidInputError(f"negative variance {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @classmethod
    def from_std(cls, mean: float, std: float) -> "GaussianDist":
        return cls(mean, std * std)


def std_pdf(z: float) -> float:
    return INV_SQRT_2PI * math.exp(-0.5 * z * z)


def std_cdf(z: float) -> float:
    """Standard normal CDF, accurate to ~1e-16 absolute in both tails."""
    if not math.isfinite(z):
        raise DomainError(f"std_cdf needs a finite argument, got {z}")
    return 0.5 * math.erfc(-z / SQRT2)


def std_sf(z: float) -> float:
    """Upper tail 1 - Phi(z) without cancellation."""
    if not math.isfinite(z):
        raise DomainError(f"std_sf needs a finite argument, got {z}")
    return 0.5 * math.erfc(z / SQRT2)


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return ((((( _C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if p > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log1p(-p))
        return -((((( _C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
            ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
        (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)


def std_quantile(p: float) -> float:
    """Inverse standard normal CDF for 0 < p < 1.

    Rational approximation followed by one Newton step on the CDF; the step
    works on the smaller tail so that p close to 1 keeps its precision.
    """
    if not (0.0 < p < 1.0):
        raise DomainError(f"std_quantile needs 0 < p < 1, got {p}")
    z = _acklam(p)
    if p <= 0.5:
        err = std_cdf(z) - p
    else:
        err = (1.0 - p) - std_sf(z)
    dens = std_pdf(z)
    if dens > 0.0:
        z -= err / dens
    return z


def partial_expectation_above(dist: GaussianDist, q: float) -> float:
    """E[max(D - q, 0)] for D ~ dist."""
    sigma = dist.std
    if sigma == 0.0:
        return max(dist.mean - q, 0.0)
    z = (q - dist.mean) / sigma
    return sigma * (std_pdf(z) - z * std_sf(z))


def partial_expectation_below(dist: GaussianDist, q: float) -> float:
    """E[max(q - D, 0)] for D ~ dist."""
    sigma = dist.std
    if sigma == 0.0:
        return max(q - dist.mean, 0.0)
    z = (q - dist.mean) / sigma
    return sigma * (std_pdf(z) + z * std_cdf(z))


def sample(dist: GaussianDist, rng: np.random.Generator) -> float:
    """Draw one variate; advances ``rng`` only when the variance is positive."""
    if dist.variance == 0.0:
        return dist.mean
    return dist.mean + dist.std * float(rng.standard_normal())
