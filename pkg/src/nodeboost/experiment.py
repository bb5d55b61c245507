"""Experiment orchestration: config parsing, training runs, evaluation
artifacts (ROC, traces, QQ pairs, covariance diagnostics, boundary grids).

Configs are flat key=value text files; every produced artifact is a CSV the
harness can read back.  A fixed seed makes reruns bit-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import metrics
from .boosting import BoostConfig, BoostModel, adaboost_train, train
from .cascade import (CascadeConfig, CascadeGoal, CascadeLimits, GeneratorPool,
                      margin_normality, train_cascade)
from .data import Dataset, InputError
from .linear_asym import class_stats, covariance_diagnostic
from .model_io import save_dataset_csv, save_model, write_csv
from .synth import SyntheticSpec, generate, ring_negative_pool

_SYNTH_KINDS = ("two_gaussians", "gaussian_vs_ring", "gaussian_vs_uniform")


def parse_config(path) -> dict:
    """Flat key=value file; '#' starts a comment, blank lines ignored."""
    cfg = {}
    for i, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}: line {i}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _get(cfg: dict, key: str, default, cast):
    if key not in cfg:
        return default
    try:
        return cast(cfg[key])
    except ValueError:
        raise InputError(f"config key {key}={cfg[key]!r} is not a valid {cast.__name__}") from None


def synthetic_spec_from_config(cfg: dict, seed_override: int | None = None) -> SyntheticSpec:
    seed = seed_override if seed_override is not None else _get(cfg, "seed", 0, int)
    return SyntheticSpec(
        kind=cfg.get("task", "gaussian_vs_ring"),
        n_pos=_get(cfg, "n_pos", 50, int),
        n_neg=_get(cfg, "n_neg", 500, int),
        dimension=_get(cfg, "dimension", 2, int),
        seed=seed,
        mean1=tuple(_get(cfg, "mean1", (0.0,) * _get(cfg, "dimension", 2, int),
                         lambda s: [float(v) for v in s.split(",")])),
        cov1=_get(cfg, "cov1", 0.5625, float),
        mean2=tuple(_get(cfg, "mean2", (0.0,) * _get(cfg, "dimension", 2, int),
                         lambda s: [float(v) for v in s.split(",")])),
        cov2=_get(cfg, "cov2", 1.0, float),
        ring_radius=_get(cfg, "ring_radius", 1.7, float),
        ring_width=_get(cfg, "ring_width", 0.45, float),
        box_halfwidth=_get(cfg, "box_halfwidth", 3.0, float),
    )


def boost_config_from_config(cfg: dict, seed: int | None = None) -> BoostConfig:
    algorithm = cfg.get("algorithm", "fisher")
    if algorithm == "fisher":
        delta = 1.0
    elif algorithm == "lac":
        delta = 0.0
    elif algorithm == "blend":
        delta = _get(cfg, "delta", 1.0, float)
    elif algorithm == "ridge":
        delta = _get(cfg, "delta", 0.0, float)   # ridge-regularized asymmetric variant
    else:
        raise InputError(f"unknown algorithm {algorithm!r}")
    return BoostConfig(
        theta=_get(cfg, "theta", 0.1, float),
        epsilon=_get(cfg, "epsilon", 1e-5, float),
        max_weak=_get(cfg, "max_weak", 100, int),
        delta=delta,
        ridge=_get(cfg, "ridge", 0.0, float),
        target_fp=_get(cfg, "target_fp", 0.5, float),
        seed=seed,
    )


def _train_by_algorithm(data: Dataset, cfg: dict, seed: int | None):
    algorithm = cfg.get("algorithm", "fisher")
    if algorithm == "adaboost":
        return adaboost_train(data, rounds=_get(cfg, "max_weak", 100, int))
    return train(data, boost_config_from_config(cfg, seed))


def _dataset_from_config(cfg: dict, seed: int | None):
    if cfg.get("task", "gaussian_vs_ring") in _SYNTH_KINDS:
        return generate(synthetic_spec_from_config(cfg, seed))
    if cfg.get("task") == "csv":
        from .model_io import load_dataset_csv
        return load_dataset_csv(cfg["data"])
    raise InputError(f"unknown task {cfg.get('task')!r}")


def run_experiment(cfg: dict, out_dir, seed_override: int | None = None) -> metrics.EvalReport:
    """generate/load -> train -> evaluate -> write artifact CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = seed_override if seed_override is not None else _get(cfg, "seed", 0, int)
    data = _dataset_from_config(cfg, seed)
    model, trace = _train_by_algorithm(cfg=cfg, data=data, seed=seed)
    save_model(model, out / "model.txt")
    if getattr(trace, "objectives", None):
        write_csv(out / "trace.csv", ["iteration", "objective", "edge", "r"],
                  [(i + 1, o, e, r) for i, (o, e, r) in
                   enumerate(zip(trace.objectives, trace.edges, trace.r_values))])
    # evaluation set: fresh seeded draw for synthetic tasks, training data otherwise
    if cfg.get("task", "gaussian_vs_ring") in _SYNTH_KINDS:
        test_cfg = dict(cfg)
        test_cfg["n_pos"] = str(_get(cfg, "test_n_pos", 4 * _get(cfg, "n_pos", 50, int), int))
        test_cfg["n_neg"] = str(_get(cfg, "test_n_neg", 4 * _get(cfg, "n_neg", 500, int), int))
        test = generate(synthetic_spec_from_config(test_cfg, seed + 10_000))
    else:
        test = data
    report = metrics.roc(model.scores(test.X), test.y,
                         fp_of_interest=_get(cfg, "target_fp", 0.5, float))
    write_csv(out / "roc.csv", ["fp_rate", "detection_rate"], report.roc_points)
    _write_diagnostics(out, model, data)
    if data.d == 2:
        _write_boundary_grid(out / "boundary.csv", model, data)
    write_csv(out / "summary.csv",
              ["detection_rate_at_fp", "log_average_rate", "n_weak"],
              [(report.detection_rate_at_fp, report.log_average_rate, model.n_weak)])
    return report


def _write_diagnostics(out: Path, model: BoostModel, data: Dataset) -> None:
    margins = data.y * model.scores(data.X)
    pos_margins = margins[:data.m1]
    if pos_margins.size >= 20 and pos_margins.std(ddof=1) > 0:
        pairs, r = margin_normality(pos_margins)
        write_csv(out / "qq.csv", ["theoretical_quantile", "empirical_quantile"], pairs)
        (out / "qq_r.txt").write_text(f"{r!r}\n")
    responses_neg = np.column_stack([s.responses(data.negatives()) for s in model.stumps])
    responses_pos = np.column_stack([s.responses(data.positives()) for s in model.stumps])
    if responses_neg.shape[1] >= 2 and data.m1 >= 2 and data.m2 >= 2:
        stats = class_stats(responses_pos, responses_neg)
        diag = covariance_diagnostic(stats.sigma2)
        write_csv(out / "cov_diag.csv", ["diag_mean", "offdiag_mean", "ratio"],
                  [(diag.diag_mean, diag.offdiag_mean,
                    diag.ratio if np.isfinite(diag.ratio) else -1.0)])


def _write_boundary_grid(path, model: BoostModel, data: Dataset, steps: int = 80) -> None:
    """Score surface over the bounding box, for external contour plotting."""
    lo = data.X.min(axis=0) - 0.5
    hi = data.X.max(axis=0) + 0.5
    xs = np.linspace(lo[0], hi[0], steps)
    ys = np.linspace(lo[1], hi[1], steps)
    XX, YY = np.meshgrid(xs, ys)
    grid = np.column_stack([XX.ravel(), YY.ravel()])
    scores = model.scores(grid)
    rows = np.column_stack([grid, scores - model.b])
    write_csv(path, ["x", "y", "score_minus_b"], rows)


def run_sweep(cfg: dict, out_dir, seed_override: int | None = None) -> dict:
    """One training per value of the swept parameter (e.g. sweep=theta:0.1,0.05)."""
    if "sweep" not in cfg:
        raise InputError("sweep config needs a 'sweep=key:v1,v2,...' entry")
    key, _, values = cfg["sweep"].partition(":")
    key = key.strip()
    if key not in ("theta", "delta", "ridge"):
        raise InputError(f"can only sweep theta, delta or ridge, got {key!r}")
    out = Path(out_dir)
    reports = {}
    for raw in values.split(","):
        value = raw.strip()
        sub = dict(cfg)
        sub[key] = value
        sub.pop("sweep")
        if key in ("delta", "ridge"):
            sub["algorithm"] = "blend" if key == "delta" else "ridge"
        label = f"{key}_{value}"
        reports[label] = run_experiment(sub, out / label, seed_override)
    rows = [(i, rep.detection_rate_at_fp, rep.log_average_rate)
            for i, rep in enumerate(reports.values())]
    write_csv(out / "sweep_summary.csv", ["index", "detection_rate_at_fp", "log_average_rate"], rows)
    return reports


def run_cascade_experiment(cfg: dict, out_dir, seed_override: int | None = None):
    """Train a multi-exit cascade on a synthetic task and write its node table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = seed_override if seed_override is not None else _get(cfg, "seed", 0, int)
    spec = synthetic_spec_from_config(cfg, seed)
    positives = generate(spec).positives()
    pool = GeneratorPool(ring_negative_pool(spec), seed=seed + 1)
    cascade_cfg = CascadeConfig(
        boost=boost_config_from_config(cfg, seed),
        adaboost_head=_get(cfg, "adaboost_head", 2, int),
        goal=CascadeGoal(d_min=_get(cfg, "d_min", 0.995, float),
                         f_max=_get(cfg, "f_max", 0.5, float),
                         overall_fp=_get(cfg, "overall_fp", 1e-3, float)),
        limits=CascadeLimits(max_nodes=_get(cfg, "max_nodes", 10, int),
                             node_weak_cap=_get(cfg, "node_weak_cap", 80, int),
                             negatives_per_node=_get(cfg, "negatives_per_node", 500, int)),
    )
    model, trace = train_cascade(positives, pool, cascade_cfg)
    save_model(model, out / "cascade.txt")
    write_csv(out / "nodes.csv", ["node", "weak_count", "d_t", "f_t"],
              [(i + 1, n.weak_count, n.d_t, n.f_t) for i, n in enumerate(model.nodes)])
    if model.nodes:
        # average weak-classifier evaluations on a majority-negative stream
        stream_rng = np.random.default_rng(seed + 2)
        stream = ring_negative_pool(spec)(stream_rng, 2000)
        mean_features = float(np.mean([model.predict(x)[2] for x in stream]))
        write_csv(out / "cascade_summary.csv",
                  ["nodes", "total_weak", "overall_fp_product", "mean_features_per_window"],
                  [(len(model.nodes), len(model.stumps),
                    float(np.prod(trace.node_f)), mean_features)])
    if trace.flags:
        (out / "flags.txt").write_text("\n".join(trace.flags) + "\n")
    return model, trace


def write_dataset(cfg: dict, out_dir, seed_override: int | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = generate(synthetic_spec_from_config(cfg, seed_override))
    path = out / "dataset.csv"
    save_dataset_csv(data, path)
    return path
