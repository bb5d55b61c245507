"""Closed-form asymmetric and Fisher-criterion linear weights over fixed
weak-classifier responses, plus the covariance-diagonality diagnostic.

The asymmetric fit maximizes w'(mu1 - mu2) / sqrt(w'Sigma1 w) using only the
positive-class covariance; the Fisher fit uses the delta-blended within-class
covariance C_w = c1*Sigma1 + delta*c2*Sigma2.  Both reduce to a single
symmetric positive-definite linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boosting import fit_offset
from .data import DegenerateClassError, InputError


@dataclass(frozen=True)
class ClassStats:
    """Per-class mean vectors and unbiased covariance matrices."""

    mu1: np.ndarray
    mu2: np.ndarray
    sigma1: np.ndarray
    sigma2: np.ndarray


@dataclass(frozen=True)
class LinearFit:
    w: np.ndarray
    b: float
    jitter_used: float = 0.0


def class_stats(responses_pos: np.ndarray, responses_neg: np.ndarray) -> ClassStats:
    """Means and unbiased (count-1 denominator) covariances of response rows."""
    rp = np.asarray(responses_pos, dtype=np.float64)
    rn = np.asarray(responses_neg, dtype=np.float64)
    if rp.ndim != 2 or rn.ndim != 2 or rp.shape[1] != rn.shape[1]:
        raise InputError("response matrices must be 2-D with matching widths")
    if rp.shape[0] < 2 or rn.shape[0] < 2:
        raise DegenerateClassError("need at least 2 rows per class for covariance")
    return ClassStats(
        mu1=rp.mean(axis=0),
        mu2=rn.mean(axis=0),
        sigma1=np.atleast_2d(np.cov(rp, rowvar=False, ddof=1)),
        sigma2=np.atleast_2d(np.cov(rn, rowvar=False, ddof=1)),
    )


def _spd_solve(C: np.ndarray, rhs: np.ndarray, jitter: float):
    """Cholesky-checked solve of (C + jitter*I) x = rhs with scaled fallback.

    Returns (x, jitter_actually_used).  If the jittered matrix is still not
    positive definite, the fallback 1e-6 * trace/n is added on top.
    """
    n = C.shape[0]
    attempt = C + jitter * np.eye(n) if jitter > 0 else C
    try:
        np.linalg.cholesky(attempt)
        return np.linalg.solve(attempt, rhs), jitter
    except np.linalg.LinAlgError:
        fallback = jitter + 1e-6 * max(np.trace(C) / n, 1.0)
        attempt = C + fallback * np.eye(n)
        np.linalg.cholesky(attempt)   # raises if still not SPD
        return np.linalg.solve(attempt, rhs), fallback


def lac_fit(stats: ClassStats, jitter: float = 0.0) -> LinearFit:
    """Asymmetric closed form: (Sigma1 + jitter*I) w = mu1 - mu2, b = w'mu2."""
    w, used = _spd_solve(np.asarray(stats.sigma1, dtype=np.float64),
                         stats.mu1 - stats.mu2, jitter)
    return LinearFit(w=w, b=float(w @ stats.mu2), jitter_used=used)


def lda_fit(stats: ClassStats, delta: float = 1.0, class_weights=(0.5, 0.5),
            jitter: float = 0.0, responses_pos=None, responses_neg=None,
            target_fp: float = 0.5) -> LinearFit:
    """Fisher-criterion fit with blended within-class covariance.

    Solves (c1*Sigma1 + delta*c2*Sigma2 + jitter*I) w = mu1 - mu2.  When the
    training responses are supplied, the offset is tuned by the same line
    search nodes use (false-positive target), otherwise it falls back to
    w'mu2.
    """
    c1, c2 = class_weights
    C = c1 * np.asarray(stats.sigma1, dtype=np.float64)
    if delta != 0.0:
        C = C + delta * c2 * np.asarray(stats.sigma2, dtype=np.float64)
    w, used = _spd_solve(C, stats.mu1 - stats.mu2, jitter)
    if responses_pos is not None and responses_neg is not None:
        scores = np.concatenate([np.asarray(responses_pos) @ w,
                                 np.asarray(responses_neg) @ w])
        labels = np.concatenate([np.ones(len(responses_pos)),
                                 -np.ones(len(responses_neg))])
        b = fit_offset(scores, labels, target_fp)
    else:
        b = float(w @ stats.mu2)
    return LinearFit(w=w, b=b, jitter_used=used)


@dataclass(frozen=True)
class CovarianceDiagnostic:
    diag_mean: float
    offdiag_mean: float
    ratio: float       # inf when the off-diagonal mean is exactly zero


def covariance_diagnostic(sigma: np.ndarray) -> CovarianceDiagnostic:
    """Mean absolute diagonal vs off-diagonal magnitude of a covariance matrix.

    A large ratio says the matrix is close to a scaled identity, which is the
    regime where ignoring it (the delta = 0 variant) loses little.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    n = sigma.shape[0]
    if sigma.ndim != 2 or sigma.shape[1] != n or n < 2:
        raise InputError("need a square matrix with n >= 2")
    diag = np.abs(np.diag(sigma))
    off = np.abs(sigma[~np.eye(n, dtype=bool)])
    diag_mean = float(diag.mean())
    offdiag_mean = float(off.mean())
    ratio = float("inf") if offdiag_mean == 0.0 else diag_mean / offdiag_mean
    return CovarianceDiagnostic(diag_mean=diag_mean, offdiag_mean=offdiag_mean, ratio=ratio)
