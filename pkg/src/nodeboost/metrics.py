"""ROC computation and the summary rates used to compare node classifiers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import InputError


@dataclass
class EvalReport:
    detection_rate_at_fp: float
    roc_points: np.ndarray                  # (k, 2) rows of (fp_rate, detection_rate)
    log_average_rate: float
    mean_features_per_window: float | None = None
    extra: dict = field(default_factory=dict)


def roc_points(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Threshold sweep over the distinct scores.

    Row k is (false-positive rate, detection rate) for the classifier
    score >= b as b decreases; the curve starts at (0, .) and ends at (1, 1)
    and is non-decreasing in both coordinates.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == -1]
    if pos.size == 0 or neg.size == 0:
        raise InputError("ROC needs both classes present")
    distinct = np.unique(scores)[::-1]
    thresholds = np.concatenate([[distinct[0] + 1.0], distinct])
    fp = np.array([np.mean(neg >= b) for b in thresholds])
    dr = np.array([np.mean(pos >= b) for b in thresholds])
    # keep the upper envelope: one point per fp level, best detection rate
    pts = {}
    for f, d in zip(fp, dr):
        pts[f] = max(pts.get(f, 0.0), d)
    out = np.array(sorted(pts.items()))
    return out


def detection_rate_at(points: np.ndarray, fp: float) -> float:
    """Linear interpolation of the ROC at a false-positive rate."""
    return float(np.interp(fp, points[:, 0], points[:, 1]))


def log_average_rate(points: np.ndarray, lo: float = 0.01, hi: float = 1.0,
                     positions: int = 9) -> float:
    """Mean detection rate at log-spaced false-positive positions in [lo, hi]."""
    fps = np.logspace(np.log10(lo), np.log10(hi), positions)
    return float(np.mean([detection_rate_at(points, f) for f in fps]))


def roc(scores: np.ndarray, labels: np.ndarray, fp_of_interest: float = 0.5) -> EvalReport:
    pts = roc_points(scores, labels)
    return EvalReport(
        detection_rate_at_fp=detection_rate_at(pts, fp_of_interest),
        roc_points=pts,
        log_average_rate=log_average_rate(pts),
    )
