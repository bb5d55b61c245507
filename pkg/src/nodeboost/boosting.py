"""Totally-corrective boosting by column generation.

Each iteration picks the stump with the largest weighted edge (the most
violated dual constraint), appends its response column, and re-optimizes all
coefficients on the simplex with the entropic-gradient solver.  The dual
variables are recovered in closed form from the margins, and training stops
as soon as no stump beats the best existing column edge by more than epsilon.

The quadratic form is the block margin-variance matrix: diagonal entries
1/m, off-diagonal entries -1/(m(m_c - 1)) within each class block.  The
lower (negative-class) block is scaled by `delta`: 1 recovers the
Fisher-criterion trainer, 0 the asymmetric variant that ignores the negative
covariance.  A `ridge` term delta~ * I regularizes the margins directly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import (Dataset, DecisionStump, DegenerateClassError, InputError,
                   ResponseMatrix, build_balance_vector, ensemble_scores)
from .simplex_qp import EGConfig, SimplexQP, eg_solve, warm_start
from .stumps import best_stump


class NumericalFailureError(RuntimeError):
    """A recovered quantity is far enough off to indicate a failed solve."""


@dataclass(frozen=True)
class QSpec:
    """Block quadratic form on margins: blockdiag(Q1, delta*Q2) + ridge*I."""

    m1: int
    m2: int
    delta: float = 1.0
    ridge: float = 0.0

    def __post_init__(self):
        if self.m1 < 2:
            raise DegenerateClassError(f"positive block needs m1 >= 2, got {self.m1}")
        if self.delta > 0 and self.m2 < 2:
            raise DegenerateClassError(f"active negative block needs m2 >= 2, got {self.m2}")
        if self.delta < 0 or self.ridge < 0:
            raise InputError("delta and ridge must be nonnegative")

    @property
    def m(self) -> int:
        return self.m1 + self.m2

    def matrix(self) -> np.ndarray:
        """Materialize the m-by-m matrix (small problems / verification)."""
        m, m1, m2 = self.m, self.m1, self.m2
        Q = np.zeros((m, m))
        Q[:m1, :m1] = _class_block(m, m1)
        if self.delta > 0:
            Q[m1:, m1:] = self.delta * _class_block(m, m2)
        if self.ridge > 0:
            Q[np.diag_indices(m)] += self.ridge
        return Q

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Q @ rho in O(m) using the diagonal-plus-rank-one block structure."""
        rho = np.asarray(rho, dtype=np.float64)
        if rho.shape != (self.m,):
            raise InputError(f"margin vector length {rho.size} != m={self.m}")
        out = np.zeros_like(rho)
        r1 = rho[:self.m1]
        out[:self.m1] = (self.m1 / (self.m * (self.m1 - 1.0))) * (r1 - r1.mean())
        if self.delta > 0:
            r2 = rho[self.m1:]
            out[self.m1:] = self.delta * (self.m2 / (self.m * (self.m2 - 1.0))) * (r2 - r2.mean())
        if self.ridge > 0:
            out += self.ridge * rho
        return out

    def gram(self, A: np.ndarray) -> np.ndarray:
        """A' Q A without materializing Q (n-by-n, for the simplex QP)."""
        A = np.asarray(A, dtype=np.float64)
        m1, m2, m = self.m1, self.m2, self.m
        A1 = A[:m1]
        s1 = A1.sum(axis=0)
        P = (m1 / (m * (m1 - 1.0))) * (A1.T @ A1) - np.outer(s1, s1) / (m * (m1 - 1.0))
        if self.delta > 0:
            A2 = A[m1:]
            s2 = A2.sum(axis=0)
            P += self.delta * ((m2 / (m * (m2 - 1.0))) * (A2.T @ A2)
                               - np.outer(s2, s2) / (m * (m2 - 1.0)))
        if self.ridge > 0:
            P += self.ridge * (A.T @ A)
        return P


def _class_block(m: int, mc: int) -> np.ndarray:
    B = np.full((mc, mc), -1.0 / (m * (mc - 1.0)))
    B[np.diag_indices(mc)] = 1.0 / m
    return B


def build_q(spec: QSpec) -> np.ndarray:
    return spec.matrix()


def primal_objective(rho: np.ndarray, q: QSpec, theta: float, e: np.ndarray) -> float:
    """0.5 rho'Q rho - theta e'rho."""
    rho = np.asarray(rho, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    if rho.shape != e.shape:
        raise InputError("rho and e lengths differ")
    return float(0.5 * rho @ q.apply(rho) - theta * (e @ rho))


@dataclass(frozen=True)
class DualState:
    u: np.ndarray
    r: float


def recover_duals(rho: np.ndarray, q: QSpec, theta: float, e: np.ndarray,
                  A: np.ndarray, fail_below: float | None = -1e-6) -> DualState:
    """Closed-form dual recovery u = -Q rho + theta e; r = max_j u'A_:j.

    Entries in [-1e-10, 0) are clamped to zero.  With the default
    `fail_below`, a strongly negative entry raises NumericalFailureError;
    pass None to accept signed duals (the equality-constrained multiplier is
    not sign-restricted, and converged imbalanced trainings do produce small
    negative entries).
    """
    u = theta * e - q.apply(rho)
    if fail_below is not None and np.min(u) < fail_below:
        raise NumericalFailureError(
            f"dual weight {np.min(u):.3e} below {fail_below:.0e}; primal solve suspect")
    u = np.where((u < 0) & (u >= -1e-10), 0.0, u)
    A = np.asarray(A, dtype=np.float64)
    if A.shape[1] == 0:
        raise InputError("need at least one response column to compute r")
    r = float(np.max(u @ A))
    return DualState(u=u, r=r)


def dual_objective(state: DualState, q: QSpec, theta: float, e: np.ndarray) -> float:
    """-r - 0.5 (u - theta e)' Q^{-1} (u - theta e); requires ridge > 0."""
    if q.ridge <= 0:
        raise InputError("dual objective needs an invertible Q (ridge > 0)")
    diff = state.u - theta * e
    sol = np.linalg.solve(q.matrix(), diff)
    return float(-state.r - 0.5 * diff @ sol)


@dataclass(frozen=True)
class BoostConfig:
    """Training knobs; delta=1 is the Fisher variant, delta=0 the asymmetric one."""

    theta: float = 0.1             # linear-term weight, usually from {1/10 .. 1/50}
    epsilon: float = 1e-5          # dual-feasibility slack for stopping
    max_weak: int = 100
    delta: float = 1.0
    ridge: float = 0.0
    target_fp: float = 0.5         # offset line-search target
    warm_start_mix: float = 0.1
    eg: EGConfig = field(default_factory=lambda: EGConfig(tolerance=1e-7, max_iterations=100_000))
    # restarted solver passes over the final problem: each pass re-enters the
    # diminishing step schedule at k=1, which sweeps out residual mass on
    # near-tied columns far faster than one long run
    final_restarts: int = 0
    feature_fraction: float | None = None   # per-iteration random feature subsample
    seed: int | None = None

    def __post_init__(self):
        if self.theta <= 0:
            raise InputError("theta must be positive")
        if self.epsilon <= 0:
            raise InputError("epsilon must be positive")


@dataclass
class BoostModel:
    """Ensemble sign(sum_j w_j h_j(x) - b) with w on the unit simplex."""

    stumps: list[DecisionStump]
    w: np.ndarray
    b: float
    converged: bool = True

    @property
    def n_weak(self) -> int:
        return len(self.stumps)

    def scores(self, X: np.ndarray) -> np.ndarray:
        return ensemble_scores(X, self.stumps, self.w)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.where(self.scores(X) >= self.b, 1, -1)


@dataclass
class TrainTrace:
    objectives: list[float] = field(default_factory=list)
    edges: list[float] = field(default_factory=list)
    r_values: list[float] = field(default_factory=list)
    eg_iterations: list[int] = field(default_factory=list)
    min_dual: list[float] = field(default_factory=list)
    stopped_reason: str = ""


def train(data: Dataset, cfg: BoostConfig) -> tuple[BoostModel, TrainTrace]:
    """Column-generation training of the totally-corrective ensemble."""
    qspec = QSpec(m1=data.m1, m2=data.m2, delta=cfg.delta, ridge=cfg.ridge)
    e = build_balance_vector(data.m1, data.m2)
    rng = np.random.default_rng(cfg.seed)
    responses = ResponseMatrix(data)
    u = np.full(data.m, 1.0 / data.m)
    r = np.inf
    w = np.empty(0)
    trace = TrainTrace()
    converged = False
    for iteration in range(cfg.max_weak):
        found = best_stump(data, u, feature_indices=_feature_subset(data.d, cfg, rng))
        if iteration > 0 and found.edge < r + cfg.epsilon:
            converged = True
            trace.stopped_reason = "dual feasible"
            break
        if found.degenerate and iteration > 0:
            trace.stopped_reason = "degenerate stump search"
            break
        responses.append(found.stump)
        A = responses.matrix
        n = responses.n
        problem = SimplexQP(P=qspec.gram(A), c=-cfg.theta * (e @ A))
        if n == 1:
            w = np.array([1.0])
            eg_iters = 0
        else:
            w0 = warm_start(w, n, cfg.warm_start_mix)
            result = eg_solve(problem, w0, cfg.eg)
            eg_iters = result.iterations
            # the padded previous solution reproduces the previous objective
            # exactly; never return anything worse than it
            padded = np.concatenate([w, [0.0]])
            w = result.w if result.objective <= problem.objective(padded) else padded
        rho = A @ w
        duals = recover_duals(rho, qspec, cfg.theta, e, A, fail_below=None)
        u, r = duals.u, duals.r
        if float(e @ rho) < -1e-12:
            warnings.warn("mean positive margin fell below mean negative margin "
                          f"(e'rho = {float(e @ rho):.3e}) at iteration {iteration + 1}",
                          RuntimeWarning, stacklevel=2)
        trace.objectives.append(primal_objective(rho, qspec, cfg.theta, e))
        trace.edges.append(found.edge)
        trace.r_values.append(r)
        trace.eg_iterations.append(eg_iters)
        trace.min_dual.append(float(np.min(u)))
    else:
        trace.stopped_reason = "max weak classifiers"
    if responses.n == 0:
        raise InputError("training added no weak classifiers")
    if cfg.final_restarts > 0 and responses.n > 1:
        w, u, r = _polish_final(responses.matrix, w, qspec, cfg, e)
        rho = responses.matrix @ w
        trace.objectives[-1] = primal_objective(rho, qspec, cfg.theta, e)
    scores = ensemble_scores(data.X, responses.stumps, w)
    b = fit_offset(scores, data.y, cfg.target_fp)
    model = BoostModel(stumps=list(responses.stumps), w=w, b=b, converged=converged)
    return model, trace


def _polish_final(A: np.ndarray, w: np.ndarray, qspec: QSpec, cfg: BoostConfig,
                  e: np.ndarray):
    """Restarted solver passes until the primal-dual gap r - u'rho is tiny."""
    problem = SimplexQP(P=qspec.gram(A), c=-cfg.theta * (e @ A))
    pass_cfg = EGConfig(tolerance=1e-13, max_iterations=30_000,
                        lipschitz_override=cfg.eg.lipschitz_override)
    for _ in range(cfg.final_restarts):
        duals = recover_duals(A @ w, qspec, cfg.theta, e, A, fail_below=None)
        u, r = duals.u, duals.r
        if r - float(u @ (A @ w)) <= 1e-7:
            return w, u, r
        w0 = np.maximum(w, 1e-300)
        result = eg_solve(problem, w0 / w0.sum(), pass_cfg)
        if result.objective <= problem.objective(w):
            w = result.w
    duals = recover_duals(A @ w, qspec, cfg.theta, e, A, fail_below=None)
    return w, duals.u, duals.r


def _feature_subset(d: int, cfg: BoostConfig, rng) -> np.ndarray | None:
    if cfg.feature_fraction is None or cfg.feature_fraction >= 1.0:
        return None
    k = max(1, int(round(cfg.feature_fraction * d)))
    return np.sort(rng.choice(d, size=k, replace=False))


def fit_offset(scores: np.ndarray, labels: np.ndarray, target_fp: float) -> float:
    """Line search for the offset b of sign(score - b).

    Returns the b achieving false-positive rate <= target_fp with the highest
    detection rate; candidates are midpoints of sorted distinct scores plus
    below-min/above-max sentinels, and ties resolve to the smallest b.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == -1]
    if pos.size == 0 or neg.size == 0:
        raise InputError("need both classes to fit an offset")
    distinct = np.unique(scores)
    candidates = np.concatenate([[distinct[0] - 1.0],
                                 0.5 * (distinct[:-1] + distinct[1:]),
                                 [distinct[-1] + 1.0]])
    # fp(b) is non-increasing in b, so is dr(b): the smallest feasible b
    # maximizes detection
    for b in candidates:
        if np.mean(neg >= b) <= target_fp:
            return float(b)
    return float(candidates[-1])


def adaboost_train(data: Dataset, rounds: int) -> tuple[BoostModel, TrainTrace]:
    """Stagewise discrete AdaBoost baseline on the same stump learner.

    Coefficients are reported normalized onto the simplex so models are
    directly comparable with the totally-corrective trainer.
    """
    if rounds < 1:
        raise InputError("rounds must be >= 1")
    u = np.full(data.m, 1.0 / data.m)
    stumps: list[DecisionStump] = []
    alphas: list[float] = []
    trace = TrainTrace()
    floor = 1.0 / (2.0 * data.m)   # error floor so a perfect stump keeps alpha finite
    for _ in range(rounds):
        found = best_stump(data, u)
        err = 0.5 * (1.0 - found.edge / u.sum())
        trace.edges.append(found.edge)
        if err >= 0.5:
            trace.stopped_reason = "no edge"
            break
        perfect = err < floor
        alpha = 0.5 * np.log((1.0 - max(err, floor)) / max(err, floor))
        stumps.append(found.stump)
        alphas.append(float(alpha))
        if perfect:
            trace.stopped_reason = "perfect stump"
            break
        margin_col = data.y * found.stump.responses(data.X)
        u = u * np.exp(-alpha * margin_col)
        u /= u.sum()
    if not stumps:
        raise InputError("AdaBoost found no stump with an edge")
    w = np.array(alphas)
    w /= w.sum()
    return BoostModel(stumps=stumps, w=w, b=0.0, converged=True), trace
