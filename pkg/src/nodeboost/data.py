"""Core data model: datasets, decision stumps, response matrices and margins.

Boosting here never touches raw samples after the response matrix is built:
everything downstream works on the m-by-n matrix whose (i, j) entry is
label(i) * prediction(stump j, sample i).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InputError(ValueError):
    """Invalid caller-supplied data (shapes, ranges, labels, NaN/Inf)."""


class DegenerateClassError(InputError):
    """A class has too few samples for the requested statistic."""


@dataclass(frozen=True)
class DecisionStump:
    """Threshold rule on one feature: polarity if x[feature] >= threshold else -polarity."""

    feature_index: int
    threshold: float
    polarity: int

    def __post_init__(self):
        if self.polarity not in (-1, 1):
            raise InputError(f"polarity must be -1 or +1, got {self.polarity}")

    def predict(self, x) -> int:
        return self.polarity if x[self.feature_index] >= self.threshold else -self.polarity

    def responses(self, X: np.ndarray) -> np.ndarray:
        """Vectorized predictions in {-1,+1} for the rows of X."""
        return np.where(X[:, self.feature_index] >= self.threshold,
                        self.polarity, -self.polarity).astype(np.float64)


@dataclass(frozen=True)
class Dataset:
    """Labeled samples stored positives-first.

    `index_map[i]` is the position sample i occupied in the caller's original
    ordering, kept so reports can refer back to the input.
    """

    X: np.ndarray          # (m, d) float64, finite
    y: np.ndarray          # (m,) int, +1 then -1 blocks
    m1: int
    m2: int
    index_map: np.ndarray = field(repr=False, default=None)

    @property
    def m(self) -> int:
        return self.m1 + self.m2

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @classmethod
    def from_arrays(cls, X, y) -> "Dataset":
        """Validate and reorder (stable) into the positives-first layout."""
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        if X.ndim != 2:
            raise InputError(f"X must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise InputError(f"labels shape {y.shape} does not match {X.shape[0]} samples")
        if not np.all(np.isin(y, (-1, 1))):
            raise InputError("labels must be -1 or +1")
        if not np.all(np.isfinite(X)):
            raise InputError("feature values must be finite (NaN/Inf rejected)")
        y = y.astype(np.int64)
        order = np.concatenate([np.flatnonzero(y == 1), np.flatnonzero(y == -1)])
        m1 = int(np.sum(y == 1))
        m2 = y.size - m1
        if m1 < 1 or m2 < 1:
            raise InputError(f"need at least one sample per class, got m1={m1}, m2={m2}")
        Xo = np.ascontiguousarray(X[order])
        Xo.setflags(write=False)
        yo = y[order]
        yo.setflags(write=False)
        return cls(X=Xo, y=yo, m1=m1, m2=m2, index_map=order)

    def positives(self) -> np.ndarray:
        return self.X[:self.m1]

    def negatives(self) -> np.ndarray:
        return self.X[self.m1:]


def build_response_column(stump: DecisionStump, data: Dataset) -> np.ndarray:
    """Column of the response matrix: entry i is y_i * stump(x_i), in {-1,+1}."""
    if not 0 <= stump.feature_index < data.d:
        raise InputError(f"feature index {stump.feature_index} out of range for d={data.d}")
    return data.y * stump.responses(data.X)


def build_balance_vector(m1: int, m2: int) -> np.ndarray:
    """Per-class averaging weights: first m1 entries 1/m1, remaining m2 entries 1/m2.

    Dotting this with a margin vector gives (mean positive margin) plus
    (mean negative margin); the vector sums to 2.
    """
    if m1 < 1 or m2 < 1:
        raise InputError(f"class counts must be positive, got m1={m1}, m2={m2}")
    return np.concatenate([np.full(m1, 1.0 / m1), np.full(m2, 1.0 / m2)])


class ResponseMatrix:
    """Append-only m-by-n matrix A with A[i, j] = y_i * h_j(x_i)."""

    def __init__(self, data: Dataset):
        self.data = data
        self.stumps: list[DecisionStump] = []
        self._cols: list[np.ndarray] = []

    @property
    def n(self) -> int:
        return len(self._cols)

    @property
    def matrix(self) -> np.ndarray:
        if not self._cols:
            return np.empty((self.data.m, 0))
        return np.column_stack(self._cols)

    def append(self, stump: DecisionStump) -> np.ndarray:
        col = build_response_column(stump, self.data)
        self.stumps.append(stump)
        self._cols.append(col)
        return col

    def column(self, j: int) -> np.ndarray:
        return self._cols[j]


def compute_margins(A: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Margins rho = A w; rho_i > 0 means sample i is label-consistent before offset."""
    A = np.asarray(A, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if A.ndim != 2 or w.ndim != 1 or A.shape[1] != w.size:
        raise InputError(f"dimension mismatch: A is {A.shape}, w has length {w.size}")
    return A @ w


def ensemble_scores(X: np.ndarray, stumps, w) -> np.ndarray:
    """Raw ensemble scores sum_j w_j h_j(x) for the rows of X (no offset)."""
    X = np.asarray(X, dtype=np.float64)
    scores = np.zeros(X.shape[0])
    for stump, wj in zip(stumps, w):
        if wj != 0.0:
            scores += wj * stump.responses(X)
    return scores
