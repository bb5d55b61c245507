"""Command-line front end.

Subcommands: synth, train, train-cascade, eval, roc, diag-normality,
diag-cov, sweep.  Global flags --seed, --out and --config; configs are flat
key=value files (see experiment.parse_config).  Exit code 0 on success,
nonzero with a diagnostic on stderr otherwise.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import experiment, metrics
from .cascade import margin_normality
from .data import InputError
from .linear_asym import class_stats, covariance_diagnostic
from .model_io import load_dataset_csv, load_model, write_csv


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nodeboost",
                                description="asymmetric totally-corrective boosting toolkit")
    p.add_argument("--config", type=Path, help="flat key=value config file")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", help="generate a synthetic dataset CSV")
    sub.add_parser("train", help="train one boosted model and write artifacts")
    sub.add_parser("train-cascade", help="train a multi-exit cascade")
    sub.add_parser("sweep", help="run one training per swept parameter value")
    for name, need_data in (("eval", True), ("roc", True),
                            ("diag-normality", True), ("diag-cov", True)):
        q = sub.add_parser(name)
        q.add_argument("--model", type=Path, required=True)
        if need_data:
            q.add_argument("--data", type=Path, required=True,
                           help="dataset CSV (label column first)")
    return p


def _require_config(args) -> dict:
    if args.config is None:
        raise InputError(f"'{args.command}' needs --config")
    return experiment.parse_config(args.config)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (InputError, FileNotFoundError, KeyError) as exc:
        print(f"nodeboost: error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    out: Path = args.out
    if args.command == "synth":
        path = experiment.write_dataset(_require_config(args), out, args.seed)
        print(path)
        return 0
    if args.command == "train":
        report = experiment.run_experiment(_require_config(args), out, args.seed)
        print(f"detection_rate_at_fp={report.detection_rate_at_fp!r} "
              f"log_average_rate={report.log_average_rate!r}")
        return 0
    if args.command == "train-cascade":
        model, trace = experiment.run_cascade_experiment(_require_config(args), out, args.seed)
        print(f"nodes={len(model.nodes)} weak={len(model.stumps)} "
              f"node_f={[round(n.f_t, 4) for n in model.nodes]}")
        return 0
    if args.command == "sweep":
        reports = experiment.run_sweep(_require_config(args), out, args.seed)
        for label, rep in reports.items():
            print(f"{label}: detection_rate_at_fp={rep.detection_rate_at_fp!r}")
        return 0
    model = load_model(args.model)
    data = load_dataset_csv(args.data)
    scores = model.scores(data.X) if hasattr(model, "scores") else None
    if scores is None:
        raise InputError("this command needs a boosted model, not a cascade")
    if args.command == "eval":
        out.mkdir(parents=True, exist_ok=True)
        report = metrics.roc(scores, data.y)
        write_csv(out / "roc.csv", ["fp_rate", "detection_rate"], report.roc_points)
        print(f"detection_rate_at_fp={report.detection_rate_at_fp!r} "
              f"log_average_rate={report.log_average_rate!r}")
        return 0
    if args.command == "roc":
        out.mkdir(parents=True, exist_ok=True)
        report = metrics.roc(scores, data.y)
        write_csv(out / "roc.csv", ["fp_rate", "detection_rate"], report.roc_points)
        print(out / "roc.csv")
        return 0
    if args.command == "diag-normality":
        out.mkdir(parents=True, exist_ok=True)
        margins = (data.y * scores)[:data.m1]
        pairs, r = margin_normality(margins)
        write_csv(out / "qq.csv", ["theoretical_quantile", "empirical_quantile"], pairs)
        print(f"qq_r={r!r}")
        return 0
    if args.command == "diag-cov":
        out.mkdir(parents=True, exist_ok=True)
        rp = np.column_stack([s.responses(data.positives()) for s in model.stumps])
        rn = np.column_stack([s.responses(data.negatives()) for s in model.stumps])
        diag = covariance_diagnostic(class_stats(rp, rn).sigma2)
        write_csv(out / "cov_diag.csv", ["diag_mean", "offdiag_mean", "ratio"],
                  [(diag.diag_mean, diag.offdiag_mean,
                    diag.ratio if np.isfinite(diag.ratio) else -1.0)])
        print(f"diag_mean={diag.diag_mean!r} offdiag_mean={diag.offdiag_mean!r} "
              f"ratio={diag.ratio!r}")
        return 0
    raise InputError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
