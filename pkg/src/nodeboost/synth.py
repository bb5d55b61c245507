"""Seeded synthetic task generators.

All draws go through numpy's PCG64 generator (`numpy.random.default_rng`),
so a fixed seed reproduces datasets bit for bit; ports in other languages
can match streams by implementing PCG64 with the same seeding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, InputError


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of one synthetic binary task.

    kinds:
      two_gaussians     - both classes Gaussian (mean1/cov1 vs mean2/cov2)
      gaussian_vs_ring  - Gaussian positives inside an annulus of negatives
                          (2-D only: ring_radius +- ring_width)
      gaussian_vs_uniform - Gaussian positives inside a uniform box of
                          negatives (+- box_halfwidth per axis)
    """

    kind: str = "gaussian_vs_ring"
    n_pos: int = 50
    n_neg: int = 500
    dimension: int = 2
    seed: int = 0
    mean1: tuple = (0.0, 0.0)
    cov1: tuple | float = 0.5625       # scalar variance or full matrix rows
    mean2: tuple = (0.0, 0.0)
    cov2: tuple | float = 1.0
    ring_radius: float = 1.7
    ring_width: float = 0.45
    box_halfwidth: float = 3.0

    def __post_init__(self):
        if self.kind not in ("two_gaussians", "gaussian_vs_ring", "gaussian_vs_uniform"):
            raise InputError(f"unknown synthetic kind {self.kind!r}")
        if self.n_pos < 1 or self.n_neg < 1:
            raise InputError("need at least one sample per class")


def _cov_matrix(cov, d: int) -> np.ndarray:
    C = np.asarray(cov, dtype=np.float64)
    if C.ndim == 0:
        C = float(C) * np.eye(d)
    if C.shape != (d, d):
        raise InputError(f"covariance shape {C.shape} does not match dimension {d}")
    try:
        np.linalg.cholesky(C + 0.0)
    except np.linalg.LinAlgError:
        raise InputError("covariance must be positive semidefinite "
                         "(Cholesky failed)") from None
    return C


def generate(spec: SyntheticSpec) -> Dataset:
    """Draw the task; samples come out positives-first."""
    rng = np.random.default_rng(spec.seed)
    d = spec.dimension
    mean1 = np.asarray(spec.mean1, dtype=np.float64)
    if mean1.size != d:
        raise InputError(f"mean1 length {mean1.size} != dimension {d}")
    C1 = _cov_matrix(spec.cov1, d)
    pos = rng.multivariate_normal(mean1, C1, size=spec.n_pos, method="cholesky")
    if spec.kind == "two_gaussians":
        mean2 = np.asarray(spec.mean2, dtype=np.float64)
        C2 = _cov_matrix(spec.cov2, d)
        neg = rng.multivariate_normal(mean2, C2, size=spec.n_neg, method="cholesky")
    elif spec.kind == "gaussian_vs_ring":
        if d != 2:
            raise InputError("gaussian_vs_ring is 2-D only")
        angle = rng.uniform(0.0, 2.0 * np.pi, spec.n_neg)
        radius = rng.normal(spec.ring_radius, spec.ring_width, spec.n_neg)
        neg = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
    else:
        neg = rng.uniform(-spec.box_halfwidth, spec.box_halfwidth, size=(spec.n_neg, d))
    X = np.vstack([pos, neg])
    y = np.concatenate([np.ones(spec.n_pos, dtype=np.int64),
                        -np.ones(spec.n_neg, dtype=np.int64)])
    return Dataset.from_arrays(X, y)


def ring_negative_pool(spec: SyntheticSpec):
    """Generator function for a NegativePool matching the task's negatives."""
    def draw(rng, k):
        if spec.kind == "gaussian_vs_ring":
            angle = rng.uniform(0.0, 2.0 * np.pi, k)
            radius = rng.normal(spec.ring_radius, spec.ring_width, k)
            return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
        if spec.kind == "gaussian_vs_uniform":
            return rng.uniform(-spec.box_halfwidth, spec.box_halfwidth,
                               size=(k, spec.dimension))
        mean2 = np.asarray(spec.mean2, dtype=np.float64)
        C2 = _cov_matrix(spec.cov2, spec.dimension)
        return rng.multivariate_normal(mean2, C2, size=k, method="cholesky")
    return draw
