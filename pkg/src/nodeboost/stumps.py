"""Weighted decision-stump search: the column-generation subproblem.

Given per-sample weights u (which may carry either sign), finds the stump
maximizing the edge  sum_i u_i y_i h(x_i)  over every (feature, threshold,
polarity) triple.  Threshold candidates are midpoints between consecutive
distinct sorted feature values plus below-min / above-max sentinels, so the
search space is finite and complete under the ">= threshold" convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, DecisionStump, InputError


@dataclass(frozen=True)
class StumpSearchResult:
    stump: DecisionStump
    edge: float
    degenerate: bool = False


def stump_edge(stump: DecisionStump, data: Dataset, u: np.ndarray) -> float:
    """Edge sum_i u_i y_i h(x_i) of one stump."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (data.m,):
        raise InputError(f"weight vector length {u.size} != m={data.m}")
    return float(np.dot(u * data.y, stump.responses(data.X)))


def _scan_feature(x: np.ndarray, s: np.ndarray):
    """Candidate thresholds and +1-polarity edges for one feature.

    Returns (thresholds, edges) where edges[j] = sum_{x_i >= t_j} s_i
    - sum_{x_i < t_j} s_i.  The -1 polarity edge is the negation.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ss = s[order]
    total = s.sum()
    # suffix[i] = sum of ss[i:]
    suffix = np.concatenate([np.cumsum(ss[::-1])[::-1], [0.0]])
    new_value = np.empty(xs.size, dtype=bool)
    new_value[0] = True
    new_value[1:] = xs[1:] > xs[:-1]
    starts = np.flatnonzero(new_value)
    vals = xs[starts]
    thresholds = np.empty(vals.size + 1)
    thresholds[0] = -np.inf
    thresholds[1:-1] = 0.5 * (vals[:-1] + vals[1:])
    thresholds[-1] = np.inf
    first_ge = np.concatenate([starts, [xs.size]])
    edges = 2.0 * suffix[first_ge] - total
    return thresholds, edges


def best_stump(data: Dataset, u: np.ndarray, feature_indices=None) -> StumpSearchResult:
    """Exhaustive stump search maximizing the weighted edge.

    Ties are broken deterministically: lowest feature index, then lowest
    threshold, then polarity +1.  `feature_indices` restricts the scan (the
    feature-subsampling hook); by default all features are scanned.
    """
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (data.m,):
        raise InputError(f"weight vector length {u.size} != m={data.m}")
    if not np.any(u > 0):
        raise InputError("weight vector needs at least one positive entry")
    features = range(data.d) if feature_indices is None else feature_indices
    s = u * data.y
    best_edge = -np.inf
    best = None
    degenerate = True
    for f in features:
        thresholds, plus_edges = _scan_feature(data.X[:, f], s)
        if thresholds.size > 2:
            degenerate = False
        # interleave (+1, -1) per threshold so argmax lands on the lowest
        # threshold first and polarity +1 before -1 on exact ties
        both = np.empty(2 * thresholds.size)
        both[0::2] = plus_edges
        both[1::2] = -plus_edges
        j = int(np.argmax(both))
        if both[j] > best_edge:
            best_edge = float(both[j])
            best = DecisionStump(feature_index=int(f),
                                 threshold=float(thresholds[j // 2]),
                                 polarity=1 if j % 2 == 0 else -1)
    if best is None:
        raise InputError("no features to scan")
    return StumpSearchResult(stump=best, edge=best_edge, degenerate=degenerate)
