"""Quadratic minimization over the unit simplex by entropic gradient descent.

Solves  min_w 0.5 w'Pw + c'w  s.t. w >= 0, sum w = 1  with multiplicative
exponentiated-gradient updates and the diminishing step

    tau_k = sqrt(2 log n) / L * 1 / sqrt(k),

where L bounds the sup-norm of the gradient on the simplex.  A projected
gradient method with exact Euclidean simplex projection acts as an
independent verification oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .data import InputError

# Multiplicative iterates are floored here: it keeps coordinates strictly
# positive (an exact zero could never recover) and avoids subnormal
# arithmetic, which is an order of magnitude slower on common hardware.
_WEIGHT_FLOOR = 1e-300


@dataclass(frozen=True)
class SimplexQP:
    """Problem data: P symmetric PSD (n x n), c length n."""

    P: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, dtype=np.float64)
        c = np.asarray(self.c, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise InputError(f"P must be square, got {P.shape}")
        if c.shape != (P.shape[0],):
            raise InputError(f"c length {c.shape} does not match n={P.shape[0]}")
        if P.shape[0] < 1:
            raise InputError("n must be >= 1")
        if np.max(np.abs(P - P.T), initial=0.0) > 1e-10:
            raise InputError("P must be symmetric within 1e-10")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return self.c.size

    def objective(self, w: np.ndarray) -> float:
        return float(0.5 * w @ self.P @ w + self.c @ w)


@dataclass(frozen=True)
class EGConfig:
    tolerance: float = 1e-7        # stop when max-norm iterate change drops below
    max_iterations: int = 100_000
    lipschitz_override: float | None = None

    def __post_init__(self):
        if self.tolerance <= 0:
            raise InputError("tolerance must be positive")


@dataclass(frozen=True)
class SolveResult:
    w: np.ndarray
    objective: float
    iterations: int
    converged: bool


def lipschitz_bound(problem: SimplexQP) -> float:
    """Upper bound on sup ||Pw + c||_inf over the simplex: max_j (max_k |P_jk| + |c_j|)."""
    if problem.n == 0:
        return 0.0
    return float(np.max(np.max(np.abs(problem.P), axis=1) + np.abs(problem.c)))


@njit(cache=True)
def _eg_kernel(P, c, w0, base, tol, max_iter, floor):  # pragma: no cover - jitted
    n = w0.size
    w = w0.copy()
    g = np.empty(n)
    best = w.copy()
    fbest = 1e300
    delta = 1e300
    k = 0
    converged = False
    while True:
        # gradient g = Pw + c and objective f = 0.5 w'(g + c) in one pass
        f = 0.0
        for i in range(n):
            acc = c[i]
            for j in range(n):
                acc += P[i, j] * w[j]
            g[i] = acc
            f += 0.5 * (acc + c[i]) * w[i]
        if f < fbest:
            fbest = f
            for i in range(n):
                best[i] = w[i]
        if delta < tol:
            converged = True
            break
        if k >= max_iter:
            break
        k += 1
        tau = base / np.sqrt(k)
        # subtract the max exponent before exponentiating (overflow guard);
        # the normalized update is mathematically unchanged
        zmax = -1e300
        for i in range(n):
            zi = -tau * g[i]
            g[i] = zi
            if zi > zmax:
                zmax = zi
        total = 0.0
        for i in range(n):
            gi = w[i] * np.exp(g[i] - zmax)
            if gi < floor:
                gi = floor
            g[i] = gi
            total += gi
        delta = 0.0
        for i in range(n):
            wn = g[i] / total
            d = abs(wn - w[i])
            if d > delta:
                delta = d
            w[i] = wn
    return best, fbest, k, converged


def eg_solve(problem: SimplexQP, w0="uniform", config: EGConfig | None = None) -> SolveResult:
    """Entropic gradient descent from a strictly interior starting point.

    Every iterate stays on the simplex; the best iterate seen (by objective)
    is returned, so the result never exceeds the starting objective.
    """
    if config is None:
        config = EGConfig()
    n = problem.n
    if isinstance(w0, str):
        if w0 != "uniform":
            raise InputError(f"unknown starting point {w0!r}")
        w0 = np.full(n, 1.0 / n)
    else:
        w0 = np.asarray(w0, dtype=np.float64)
        if w0.shape != (n,):
            raise InputError(f"w0 length {w0.size} != n={n}")
        if np.any(w0 <= 0) or abs(w0.sum() - 1.0) > 1e-9:
            raise InputError("w0 must be strictly interior to the simplex")
    if n == 1:
        return SolveResult(w=np.array([1.0]), objective=problem.objective(np.array([1.0])),
                           iterations=0, converged=True)
    L = config.lipschitz_override if config.lipschitz_override is not None else lipschitz_bound(problem)
    if L <= 0.0:
        # gradient is identically zero: the objective is constant on the simplex
        return SolveResult(w=w0, objective=problem.objective(w0), iterations=0, converged=True)
    base = np.sqrt(2.0 * np.log(n)) / L
    w, f, iters, converged = _eg_kernel(problem.P, problem.c, w0, base,
                                        config.tolerance, config.max_iterations, _WEIGHT_FLOOR)
    return SolveResult(w=w, objective=f, iterations=iters, converged=converged)


def warm_start(previous: np.ndarray, new_n: int, mix: float = 0.1) -> np.ndarray:
    """Interior restart after one column is appended.

    Returns (1-mix) * [previous; 0] + mix * uniform(new_n); strictly interior
    with every entry at least mix/new_n.
    """
    previous = np.asarray(previous, dtype=np.float64)
    if not 0.0 < mix < 1.0:
        raise InputError(f"mix must lie in (0,1), got {mix}")
    if new_n != previous.size + 1:
        raise InputError(f"new_n must be len(previous)+1, got {new_n} for {previous.size}")
    padded = np.concatenate([previous, [0.0]])
    return (1.0 - mix) * padded + mix / new_n


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Exact Euclidean projection onto the unit simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    k = idx[u - css / idx > 0][-1]
    tau = css[k - 1] / k
    out = v - tau
    np.maximum(out, 0.0, out=out)
    return out


def _kkt_candidate(P, c, support):
    """Equality-constrained solve on a support set; None if it fails."""
    S = np.flatnonzero(support)
    k = S.size
    KKT = np.zeros((k + 1, k + 1))
    KKT[:k, :k] = P[np.ix_(S, S)]
    KKT[:k, k] = 1.0
    KKT[k, :k] = 1.0
    rhs = np.concatenate([-c[S], [1.0]])
    try:
        sol = np.linalg.solve(KKT, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)):
        return None
    return S, sol[:k], sol[k]


def _polish(P, c, w, f_ref):
    """Active-set refinement from the support of w.

    Walks supports by dropping negative coordinates and adding coordinates
    whose gradient lies below the support gradient level (-lam).  Returns a
    KKT-verified point or None.
    """
    n = w.size
    support = w > 1e-10
    if not support.any():
        return None
    for _ in range(4 * n + 16):
        cand = _kkt_candidate(P, c, support)
        if cand is None:
            return None
        S, wS, lam = cand
        if np.min(wS) < -1e-13:
            support[S[np.argmin(wS)]] = False
            if not support.any():
                return None
            continue
        wfull = np.zeros(n)
        wfull[S] = np.maximum(wS, 0.0)
        wfull /= wfull.sum()
        g = P @ wfull + c
        outside = np.where(support, np.inf, g)
        j = int(np.argmin(outside))
        if outside[j] < -lam - 1e-11:
            support[j] = True
            continue
        return wfull
    return None


def oracle_solve(problem: SimplexQP, max_iterations: int = 1_000_000,
                 grid_resolution: float = 1e-3) -> tuple[np.ndarray, float]:
    """Verification oracle, independent of the entropic-gradient path.

    Projected gradient with exact Euclidean simplex projection and
    diminishing steps, capped at `max_iterations`; the running best point is
    periodically refined by an active-set polish whose KKT check certifies
    global optimality.  For n <= 3 a dense barycentric grid search (then the
    same polish) runs first.
    """
    n = problem.n
    P, c = problem.P, problem.c
    if n == 1:
        w = np.array([1.0])
        return w, problem.objective(w)
    best = np.full(n, 1.0 / n)
    fbest = problem.objective(best)
    if n <= 3:
        W = _barycentric_grid(n, grid_resolution)
        vals = 0.5 * np.einsum("ij,jk,ik->i", W, P, W) + W @ c
        j = int(np.argmin(vals))
        if vals[j] < fbest:
            best, fbest = W[j], float(vals[j])
        refined = _polish(P, c, best, fbest)
        if refined is not None and problem.objective(refined) <= fbest + 1e-12:
            return refined, problem.objective(refined)
    L = max(float(np.linalg.eigvalsh(P)[-1]), 1e-12)
    w = np.full(n, 1.0 / n)
    for k in range(1, max_iterations + 1):
        g = P @ w + c
        w = _project_simplex(w - (2.0 / (L * np.sqrt(k))) * g)
        f = problem.objective(w)
        if f < fbest:
            fbest, best = f, w.copy()
        if k % 50 == 0:
            refined = _polish(P, c, best, fbest)
            if refined is not None:
                fr = problem.objective(refined)
                if fr <= fbest + 1e-12:
                    return refined, fr
    return best, fbest


def _barycentric_grid(n: int, resolution: float) -> np.ndarray:
    """All simplex points with coordinates on a grid of the given resolution."""
    steps = int(round(1.0 / resolution))
    if n == 1:
        return np.array([[1.0]])
    if n == 2:
        a = np.arange(steps + 1) / steps
        return np.column_stack([a, 1.0 - a])
    ij = [(i, j) for i in range(steps + 1) for j in range(steps + 1 - i)]
    ij = np.array(ij, dtype=np.float64) / steps
    return np.column_stack([ij[:, 0], ij[:, 1], 1.0 - ij[:, 0] - ij[:, 1]])
