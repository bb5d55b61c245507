"""Worst-case accuracy calculus for mean/covariance-constrained distributions.

For a direction w and offset b, the best guaranteed accuracy gamma on a class
with mean mu and covariance Sigma depends on how much is assumed about the
distribution family.  Each family has a coefficient function phi(gamma); the
achievable worst-case accuracy solves

    phi(gamma*) = (-b + w'mu) / sqrt(w'Sigma w).

Families, strongest assumption last: arbitrary, symmetric, symmetric
unimodal, gaussian.  More assumptions mean a smaller coefficient and hence a
better guaranteed gamma at the same standardized margin.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .data import InputError


class DistributionFamily(enum.Enum):
    ARBITRARY = "arbitrary"
    SYMMETRIC = "symmetric"
    SYMMETRIC_UNIMODAL = "symmetric_unimodal"
    GAUSSIAN = "gaussian"


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the complementary error function."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


# Acklam's rational approximation coefficients for the inverse normal CDF.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF: rational initializer plus one Newton step."""
    if not 0.0 < p < 1.0:
        raise InputError(f"quantile argument must lie in (0,1), got {p}")
    p_low, p_high = 0.02425, 1.0 - 0.02425
    if p < p_low:
        q = math.sqrt(-2.0 * math.log(p))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    elif p <= p_high:
        q = p - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - p))
        x = -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
              / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    # one Newton refinement on the CDF
    err = normal_cdf(x) - p
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    if pdf > 0.0:
        x -= err / pdf
    return x


def _as_family(family) -> DistributionFamily:
    if isinstance(family, DistributionFamily):
        return family
    try:
        return DistributionFamily(family)
    except ValueError:
        raise InputError(f"unknown distribution family {family!r}") from None


def phi(gamma: float, family) -> float:
    """Coefficient of sqrt(w'Sigma w) in the worst-case constraint.

    arbitrary            sqrt(gamma / (1 - gamma))
    symmetric            sqrt(1 / (2 (1 - gamma)))
    symmetric unimodal   (2/3) sqrt(1 / (2 (1 - gamma)))
    gaussian             inverse normal CDF at gamma
    """
    if not 0.0 < gamma < 1.0:
        raise InputError(f"gamma must lie in (0,1), got {gamma}")
    family = _as_family(family)
    if family is DistributionFamily.ARBITRARY:
        return math.sqrt(gamma / (1.0 - gamma))
    if family is DistributionFamily.SYMMETRIC:
        return math.sqrt(1.0 / (2.0 * (1.0 - gamma)))
    if family is DistributionFamily.SYMMETRIC_UNIMODAL:
        return (2.0 / 3.0) * math.sqrt(1.0 / (2.0 * (1.0 - gamma)))
    return normal_quantile(gamma)


def phi_inverse(t: float, family) -> float:
    """Largest worst-case accuracy consistent with standardized margin t.

    Inverts phi on its valid branch.  The symmetric and symmetric-unimodal
    constraints degenerate to coefficient zero for gamma <= 0.5, so any
    t below phi(0.5) (and any t <= 0) maps to the 0.5 boundary for those
    families.  Results are kept inside (0,1).
    """
    family = _as_family(family)
    if family is DistributionFamily.ARBITRARY:
        if t < 0:
            raise InputError(f"arbitrary-family coefficient must be >= 0, got {t}")
        return min(t * t / (1.0 + t * t), 1.0 - 1e-16)
    if family is DistributionFamily.SYMMETRIC:
        if t <= 1.0:   # phi(0.5) = 1; below that only the gamma <= 0.5 branch binds
            return 0.5
        return min(1.0 - 0.5 / (t * t), 1.0 - 1e-16)
    if family is DistributionFamily.SYMMETRIC_UNIMODAL:
        if t <= 2.0 / 3.0:   # phi(0.5) = 2/3
            return 0.5
        return min(1.0 - 2.0 / (9.0 * t * t), 1.0 - 1e-16)
    return normal_cdf(t)


def worst_case_gamma(w, b: float, mu1, sigma1, family) -> float:
    """Solve phi(gamma*) = (-b + w'mu1) / sqrt(w'Sigma1 w) for gamma*."""
    w = np.asarray(w, dtype=np.float64)
    mu1 = np.asarray(mu1, dtype=np.float64)
    sigma1 = np.asarray(sigma1, dtype=np.float64)
    var = float(w @ sigma1 @ w)
    if var <= 0.0:
        raise InputError("direction has zero variance under sigma1")
    t = (-b + float(w @ mu1)) / math.sqrt(var)
    return phi_inverse(t, family)


def worst_case_constraint_slack(b: float, w, mu, sigma, gamma: float, family) -> float:
    """Slack of the worst-case constraint b >= w'mu + kappa sqrt(w'Sigma w).

    kappa is the family coefficient at gamma; the symmetric and
    symmetric-unimodal families contribute kappa = 0 on the gamma <= 0.5
    branch.  Nonnegative slack means the constraint holds.
    """
    if not 0.0 < gamma < 1.0:
        raise InputError(f"gamma must lie in (0,1), got {gamma}")
    family = _as_family(family)
    w = np.asarray(w, dtype=np.float64)
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if family in (DistributionFamily.SYMMETRIC, DistributionFamily.SYMMETRIC_UNIMODAL) \
            and gamma <= 0.5:
        kappa = 0.0
    else:
        kappa = phi(gamma, family)
    var = max(float(w @ sigma @ w), 0.0)
    return float(b - w @ mu - kappa * math.sqrt(var))
