"""Multi-exit cascade training, lazy prediction, bootstrapping and rate
accounting.

Every exit node reuses all weak classifiers selected by earlier nodes (the
multi-exit property): node t scores x with its own coefficients over the
shared prefix h_1..h_{n_t} and rejects when the score falls below its
threshold.  Only samples accepted by every node count as detections, so the
cascade detection / false-positive rates are the per-node products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boosting import (BoostConfig, DegenerateClassError, InputError, QSpec,
                       fit_offset, recover_duals)
from .data import Dataset, DecisionStump, ResponseMatrix, build_balance_vector, ensemble_scores
from .mpm import normal_quantile
from .simplex_qp import SimplexQP, eg_solve, warm_start
from .stumps import best_stump


def cascade_rates(d: list[float], f: list[float]) -> tuple[float, float]:
    """Whole-cascade rates under independent nodes: products of d_t and f_t."""
    for v in list(d) + list(f):
        if not 0.0 < v <= 1.0:
            raise InputError(f"rates must lie in (0,1], got {v}")
    return float(np.prod(d)) if len(d) else 1.0, float(np.prod(f)) if len(f) else 1.0


@dataclass(frozen=True)
class CascadeGoal:
    d_min: float = 0.995     # per-node minimum detection rate
    f_max: float = 0.5       # per-node maximum false-positive rate
    overall_fp: float = 1e-3 # stop once the product of f_t reaches this

    def __post_init__(self):
        if not 0.0 < self.f_max < 1.0 or not 0.0 < self.d_min <= 1.0 \
                or not 0.0 < self.overall_fp < 1.0:
            raise InputError("cascade goal rates out of range")


@dataclass(frozen=True)
class CascadeLimits:
    max_nodes: int = 10
    node_weak_cap: int = 80          # per-node cap on newly added weak classifiers
    negatives_per_node: int = 500    # negative training-set size refilled per node
    bootstrap_cap: int = 100_000     # attempts before giving up on refilling


@dataclass
class ExitNode:
    weak_count: int          # prefix length of the shared stump list
    w: np.ndarray            # coefficients over that prefix
    b: float
    d_t: float = math.nan    # achieved detection rate on this node's training data
    f_t: float = math.nan    # achieved false-positive rate on this node's training data


@dataclass
class CascadeModel:
    stumps: list[DecisionStump] = field(default_factory=list)
    nodes: list[ExitNode] = field(default_factory=list)

    def predict(self, x) -> tuple[int, int, int]:
        """Lazy single-sample prediction -> (label, exit_index, features_evaluated).

        Weak classifiers are evaluated in shared order only as far as needed;
        a sample rejected at node t costs exactly n_t evaluations.
        """
        if not self.nodes:
            raise InputError("cascade has no nodes")
        x = np.asarray(x, dtype=np.float64)
        h = np.empty(len(self.stumps))
        evaluated = 0
        for t, node in enumerate(self.nodes):
            while evaluated < node.weak_count:
                h[evaluated] = self.stumps[evaluated].predict(x)
                evaluated += 1
            score = float(node.w @ h[:node.weak_count])
            if score < node.b:
                return -1, t, evaluated
        return 1, len(self.nodes) - 1, evaluated

    def predict_full(self, x) -> int:
        """Non-lazy reference: evaluate every node on the full prefix."""
        x = np.asarray(x, dtype=np.float64)
        h = np.array([s.predict(x) for s in self.stumps], dtype=np.float64)
        for node in self.nodes:
            if float(node.w @ h[:node.weak_count]) < node.b:
                return -1
        return 1

    def accept_mask(self, X: np.ndarray) -> np.ndarray:
        """Vectorized acceptance of every row of X by all current nodes."""
        X = np.asarray(X, dtype=np.float64)
        alive = np.ones(X.shape[0], dtype=bool)
        if not self.nodes:
            return alive
        H = np.column_stack([s.responses(X) for s in self.stumps])
        for node in self.nodes:
            scores = H[:, :node.weak_count] @ node.w
            alive &= scores >= node.b
        return alive


class NegativePool:
    """Base class: a seeded source of negative-class samples."""

    def draw(self, k: int) -> np.ndarray:
        raise NotImplementedError

    @property
    def exhausted(self) -> bool:
        return False


class GeneratorPool(NegativePool):
    """Unlimited negatives from a seeded generator function f(rng, k) -> (k, d)."""

    def __init__(self, generate, seed: int = 0):
        self._generate = generate
        self._rng = np.random.default_rng(seed)

    def draw(self, k: int) -> np.ndarray:
        return np.asarray(self._generate(self._rng, k), dtype=np.float64)


class FinitePool(NegativePool):
    """A fixed negative set, drawn with or without replacement."""

    def __init__(self, samples: np.ndarray, replace: bool = False, seed: int = 0):
        self._samples = np.asarray(samples, dtype=np.float64)
        self._replace = replace
        self._rng = np.random.default_rng(seed)
        self._cursor = 0
        if not replace:
            self._order = self._rng.permutation(self._samples.shape[0])

    @property
    def exhausted(self) -> bool:
        return not self._replace and self._cursor >= self._samples.shape[0]

    def draw(self, k: int) -> np.ndarray:
        if self._replace:
            idx = self._rng.integers(0, self._samples.shape[0], size=k)
            return self._samples[idx]
        end = min(self._cursor + k, self._samples.shape[0])
        out = self._samples[self._order[self._cursor:end]]
        self._cursor = end
        return out


@dataclass
class BootstrapResult:
    samples: np.ndarray
    attempts: int
    filled: bool


def bootstrap(model: CascadeModel, pool: NegativePool, needed: int,
              cap: int = 100_000, chunk: int = 256) -> BootstrapResult:
    """Collect up to `needed` pool samples the current cascade accepts (+1).

    With no nodes yet, everything passes and the first `needed` draws are
    returned.  Stops after `cap` attempts and flags a partial fill.
    """
    if needed < 1:
        raise InputError("needed must be >= 1")
    kept = []
    total = 0
    attempts = 0
    while total < needed and attempts < cap and not pool.exhausted:
        take = min(needed - total, chunk, cap - attempts)
        batch = pool.draw(take)
        if batch.shape[0] == 0:
            break
        attempts += batch.shape[0]
        mask = model.accept_mask(batch) if model.nodes else np.ones(batch.shape[0], bool)
        passed = batch[mask]
        if passed.shape[0] > needed - total:
            passed = passed[:needed - total]
        if passed.shape[0]:
            kept.append(passed)
            total += passed.shape[0]
    samples = np.concatenate(kept, axis=0) if kept else np.empty((0, 0))
    return BootstrapResult(samples=samples, attempts=attempts, filled=total >= needed)


@dataclass(frozen=True)
class CascadeConfig:
    boost: BoostConfig = field(default_factory=BoostConfig)
    adaboost_head: int = 2    # leading nodes trained stagewise before the corrective variant
    goal: CascadeGoal = field(default_factory=CascadeGoal)
    limits: CascadeLimits = field(default_factory=CascadeLimits)


@dataclass
class CascadeTrace:
    node_d: list[float] = field(default_factory=list)
    node_f: list[float] = field(default_factory=list)
    node_weak: list[int] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)


class _CorrectiveSession:
    """Column-generation state for one node over the (fixed) node dataset."""

    def __init__(self, data: Dataset, prefix: list[DecisionStump], cfg: BoostConfig):
        self.data = data
        self.cfg = cfg
        self.qspec = QSpec(m1=data.m1, m2=data.m2, delta=cfg.delta, ridge=cfg.ridge)
        self.e = build_balance_vector(data.m1, data.m2)
        self.responses = ResponseMatrix(data)
        for stump in prefix:
            self.responses.append(stump)
        self.w = np.empty(0)
        self.u = np.full(data.m, 1.0 / data.m)
        self.r = np.inf
        if self.responses.n:
            self._resolve(fresh=True)

    def _resolve(self, fresh: bool = False):
        A = self.responses.matrix
        n = self.responses.n
        problem = SimplexQP(P=self.qspec.gram(A), c=-self.cfg.theta * (self.e @ A))
        if n == 1:
            self.w = np.array([1.0])
        elif fresh:
            self.w = eg_solve(problem, "uniform", self.cfg.eg).w
        else:
            w0 = warm_start(self.w, n, self.cfg.warm_start_mix)
            result = eg_solve(problem, w0, self.cfg.eg)
            padded = np.concatenate([self.w, [0.0]])
            self.w = result.w if result.objective <= problem.objective(padded) else padded
        duals = recover_duals(A @ self.w, self.qspec, self.cfg.theta, self.e, A, fail_below=None)
        self.u, self.r = duals.u, duals.r

    @property
    def stumps(self) -> list[DecisionStump]:
        return self.responses.stumps

    def add_one(self, force: bool = False) -> bool:
        """One column-generation step.

        Returns False when no violated constraint remains; `force` adds the
        best stump anyway (node training always increments the prefix, even
        if the re-optimized prefix is already dual feasible on this node's
        data).
        """
        found = best_stump(self.data, self.u)
        if not force and self.responses.n > 0 and found.edge < self.r + self.cfg.epsilon:
            return False
        if found.degenerate and self.responses.n > 0:
            return False
        self.responses.append(found.stump)
        self._resolve()
        return True

    def scores(self) -> np.ndarray:
        # A w gives label-signed margins; unsign them to get raw scores
        return self.data.y * (self.responses.matrix @ self.w)


class _AdaBoostSession:
    """Stagewise continuation over the shared prefix for the leading nodes."""

    def __init__(self, data: Dataset, prefix: list[DecisionStump], alphas: list[float]):
        self.data = data
        self.stumps = list(prefix)
        self.alphas = list(alphas)
        self._reweight()

    def _reweight(self):
        margins = np.zeros(self.data.m)
        for stump, a in zip(self.stumps, self.alphas):
            margins += a * (self.data.y * stump.responses(self.data.X))
        u = np.exp(-margins)
        self.u = u / u.sum()

    def add_one(self) -> bool:
        found = best_stump(self.data, self.u)
        err = 0.5 * (1.0 - found.edge / self.u.sum())
        if err >= 0.5:
            return False
        floor = 1.0 / (2.0 * self.data.m)
        alpha = 0.5 * np.log((1.0 - max(err, floor)) / max(err, floor))
        self.stumps.append(found.stump)
        self.alphas.append(float(alpha))
        margin_col = self.data.y * found.stump.responses(self.data.X)
        self.u = self.u * np.exp(-alpha * margin_col)
        self.u /= self.u.sum()
        return True

    @property
    def w(self) -> np.ndarray:
        a = np.array(self.alphas)
        return a / a.sum() if a.size else a

    def scores(self) -> np.ndarray:
        return ensemble_scores(self.data.X, self.stumps, self.w)


def train_cascade(positives: np.ndarray, pool: NegativePool, cfg: CascadeConfig
                  ) -> tuple[CascadeModel, CascadeTrace]:
    """Multi-exit cascade training.

    Positives stay fixed across nodes; negatives are the survivors of earlier
    nodes refilled by bootstrapping false positives of the current cascade
    from the pool.  Each node appends weak classifiers one at a time (with
    fully re-optimized coefficients), adjusts its threshold to the node
    false-positive target and exits once its detection-rate floor is met.
    """
    positives = np.asarray(positives, dtype=np.float64)
    if positives.ndim != 2 or positives.shape[0] < 2:
        raise DegenerateClassError("need at least 2 positive samples")
    goal, limits = cfg.goal, cfg.limits
    model = CascadeModel()
    trace = CascadeTrace()
    alphas: list[float] = []       # stagewise weights for the adaboost head
    negatives = np.empty((0, positives.shape[1]))
    f_product = 1.0
    for t in range(limits.max_nodes):
        refill = bootstrap(model, pool, needed=max(limits.negatives_per_node - negatives.shape[0], 1),
                           cap=limits.bootstrap_cap) if negatives.shape[0] < limits.negatives_per_node else None
        if refill is not None:
            if refill.samples.size:
                negatives = np.vstack([negatives, refill.samples]) if negatives.size else refill.samples
            if not refill.filled:
                reason = "pool exhausted" if pool.exhausted else "bootstrap attempt cap reached"
                trace.flags.append(f"node {t}: negative refill incomplete ({reason})")
                if negatives.shape[0] < 2:
                    break
        X = np.vstack([positives, negatives])
        y = np.concatenate([np.ones(positives.shape[0]), -np.ones(negatives.shape[0])])
        data = Dataset.from_arrays(X, y)
        use_adaboost = t < cfg.adaboost_head
        if use_adaboost:
            session = _AdaBoostSession(data, model.stumps, alphas)
        else:
            session = _CorrectiveSession(data, model.stumps, cfg.boost)
        start_n = len(model.stumps)
        node = None
        while True:
            added = session.add_one() if use_adaboost else session.add_one(force=True)
            if not added:
                trace.flags.append(f"node {t}: weak-learner search exhausted")
                break
            scores = session.scores()
            b = fit_offset(scores, data.y, goal.f_max)
            accept = scores >= b
            d_t = float(np.mean(accept[data.y == 1]))
            f_t = float(np.mean(accept[data.y == -1]))
            if d_t >= goal.d_min or len(session.stumps) - start_n >= limits.node_weak_cap:
                if d_t < goal.d_min:
                    trace.flags.append(f"node {t}: weak cap reached with d_t={d_t:.4f}")
                node = ExitNode(weak_count=len(session.stumps),
                                w=np.array(session.w, dtype=np.float64),
                                b=b, d_t=d_t, f_t=f_t)
                break
        if node is None or node.weak_count == start_n:
            break
        model.stumps = list(session.stumps)
        if use_adaboost:
            alphas = list(session.alphas)
        model.nodes.append(node)
        trace.node_d.append(node.d_t)
        trace.node_f.append(node.f_t)
        trace.node_weak.append(node.weak_count)
        if node.d_t < goal.d_min:
            break
        # drop negatives this node rejects correctly; survivors stay for the next node
        node_scores = ensemble_scores(negatives, model.stumps[:node.weak_count], node.w)
        negatives = negatives[node_scores >= node.b]
        f_product *= max(node.f_t, 1e-12)
        if f_product <= goal.overall_fp:
            break
    return model, trace


def margin_normality(margins: np.ndarray) -> tuple[np.ndarray, float]:
    """Normal-probability-plot data for a margin sample.

    Standardizes the margins, pairs their order statistics with standard
    normal quantiles at plotting positions (i - 0.5)/m and returns the pairs
    plus their Pearson correlation; r near 1 indicates Gaussian-like margins.
    """
    margins = np.asarray(margins, dtype=np.float64)
    if margins.size < 20:
        raise InputError(f"need at least 20 margins, got {margins.size}")
    std = margins.std(ddof=1)
    if std <= 0:
        raise InputError("margins have zero variance")
    z = np.sort((margins - margins.mean()) / std)
    m = z.size
    theo = np.array([normal_quantile((i - 0.5) / m) for i in range(1, m + 1)])
    pairs = np.column_stack([theo, z])
    r = float(np.corrcoef(theo, z)[0, 1])
    return pairs, r
