"""Command-line surface tying the toolkit into runnable workflows.

Subcommands: synth, score, fit, predict, eval, sweep, report. Every
command is deterministic given its inputs and --seed; failures exit
nonzero with a one-line ``error <CODE>: message`` on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import fileio, synth
from .errors import ConfigError, InputError, MetricError, ToolkitError
from .fitting import DEFAULT_VAL_SIZE, fit_val_gaussian
from .gscore import DISTANCES, METHODS, GscoreConfig, compute_gscore_fit
from .regression import (
    MetaSuite,
    evaluate_suite,
    load_model,
    predict,
    save_model,
    train_on_suite,
    tune_tau,
)
from .scores import DETECTORS, ScoreSet, TargetMetric, detector_scores, pearson, spearman


def _span(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad span {text!r}; expected LO:HI") from None


def _jitter(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad jitter {text!r}; expected LO:HI") from None


def _add_suite_args(p: argparse.ArgumentParser):
    p.add_argument("--n-train", type=int, default=150)
    p.add_argument("--n-test", type=int, default=50)
    p.add_argument("--span", type=_span, default=(0.55, 1.0), help="target AUROC span LO:HI")
    p.add_argument("--family", choices=synth.FAMILIES, default="logit_normal")
    p.add_argument("--mu-ind", type=float, default=1.5)
    p.add_argument("--sigma-ind", type=float, default=1.5)
    p.add_argument("--sigma-ood-jitter", type=_jitter, default=(0.95, 1.05))
    p.add_argument("--n-ind", type=int, default=2000)
    p.add_argument("--n-ood", type=int, default=2000)
    p.add_argument("--count-jitter", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)


def _suite_spec(args) -> synth.SuiteSpec:
    return synth.SuiteSpec(
        n_train=args.n_train,
        n_test=args.n_test,
        span=tuple(args.span),
        family=args.family,
        mu_ind=args.mu_ind,
        sigma_ind=args.sigma_ind,
        sigma_ood_jitter=tuple(args.sigma_ood_jitter),
        n_ind=args.n_ind,
        n_ood=args.n_ood,
        count_jitter=args.count_jitter,
        seed=args.seed,
    )


def _load_suite(manifest_path: str, split: str) -> MetaSuite:
    """Score sets listed in a manifest, read from <dir>/sets/<id>.csv."""
    rows = [r for r in synth.read_manifest(manifest_path) if r[1] == split]
    if not rows:
        raise InputError(f"manifest has no {split!r} rows")
    base = os.path.join(os.path.dirname(os.path.abspath(manifest_path)), "sets")
    sets = []
    for spec, _ in rows:
        path = os.path.join(base, f"{spec.id}.csv")
        if not os.path.exists(path):
            raise InputError(f"score file missing for set {spec.id!r}: {path}")
        sets.append(fileio.parse_score_file(path))
    return MetaSuite(tuple(sets))


def _load_val(args):
    if args.val is None:
        return None
    val_set = fileio.parse_score_file(args.val)
    return fit_val_gaussian(val_set)


def cmd_synth(args) -> int:
    spec = _suite_spec(args)
    rows = synth.plan_suite(spec)
    os.makedirs(os.path.join(args.out, "sets"), exist_ok=True)
    synth.write_manifest(os.path.join(args.out, "manifest.csv"), rows)
    for set_spec, _ in rows:
        s = synth.gen_score_set(set_spec)
        fileio.write_score_file(s, os.path.join(args.out, "sets", f"{set_spec.id}.csv"))
    val = synth.gen_val_scores(spec, args.n_val)
    fileio.write_score_file(val, os.path.join(args.out, "val.csv"))
    print(f"wrote {len(rows)} sets + val to {args.out}")
    return 0


def cmd_score(args) -> int:
    table = fileio.parse_logit_file(args.logits)
    values = detector_scores(table.logits, args.detector, args.temperature)
    labels = None
    if all(label != "unknown" for label in table.labels):
        labels = np.array([label == "ind" for label in table.labels], dtype=bool)
    out_set = ScoreSet(scores=values, labels=labels)
    fileio.write_score_file(out_set, args.out, sample_ids=list(table.sample_ids))
    print(f"scored {len(table.sample_ids)} samples with {args.detector} -> {args.out}")
    return 0


def cmd_fit(args) -> int:
    cfg = GscoreConfig(
        method=args.method,
        distance=args.distance,
        tau=args.tau if args.tau is not None else 0.99,
        seed=args.seed,
    )
    if args.method == "ude" and args.val is None:
        raise ConfigError("--val is required for method ude")
    target = TargetMetric.parse(args.metric)
    suite = _load_suite(args.manifest, args.split)
    val = _load_val(args)
    if args.method != "kmeans" and args.tau is None:
        tau_op, model = tune_tau(suite, cfg, target, val)
        print(f"tuned tau = {tau_op:.6g} (train loss {model.train_loss:.6g})")
    else:
        model = train_on_suite(suite, cfg, target, val)
        print(f"train loss {model.train_loss:.6g}")
    save_model(model, args.out)
    print(f"wrote model to {args.out}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    val = _load_val(args)
    if model.cfg.method == "ude" and val is None:
        raise ConfigError("model requires --val (UDE)")
    rows = []
    for path in args.scores:
        s = fileio.parse_score_file(path)
        g, fit = compute_gscore_fit(s, val, model.cfg)
        pred = predict(model, s, val)
        rows.append((s.id, g, 100.0 * pred, fit.degenerate))
    fileio.write_predictions(rows, args.out)
    print(f"predicted {len(rows)} sets -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    model = load_model(args.model)
    suite = _load_suite(args.manifest, args.split)
    val = _load_val(args)
    report = evaluate_suite(model, suite, val)
    fileio.write_report(report, args.out)
    print(
        f"rmse = {report.rmse_pct:.4g}pp  pearson = {report.pearson:.4g}  "
        f"spearman = {report.spearman:.4g}  ({len(report.records)} sets)"
    )
    return 0


def cmd_sweep(args) -> int:
    spec = _suite_spec(args)
    cfg = GscoreConfig(method=args.method, distance=args.distance, tau=args.tau, seed=args.seed)
    target = TargetMetric.parse(args.metric)
    if args.method == "ude":
        val = fit_val_gaussian(synth.gen_val_scores(spec, args.n_val))
    else:
        val = None
    suites = synth.ratio_size_sweep(
        spec,
        ratios=args.ratios.split(",") if args.ratios else [],
        sizes=[int(v) for v in args.sizes.split(",")] if args.sizes else [],
        varied=args.varied,
    )
    if not suites:
        raise InputError("nothing to sweep; pass --ratios, --sizes or --varied")
    rows = []
    for cell, suite in suites.items():
        gs = [compute_gscore_fit(s, val, cfg)[0] for s in suite]
        truths = [target.compute(s) for s in suite]
        rows.append((cell, len(suite), pearson(gs, truths), spearman(gs, truths)))
        print(f"{cell}: pearson = {rows[-1][2]:.4g}, spearman = {rows[-1][3]:.4g}")
    fileio.write_sweep(rows, args.out)
    print(f"wrote sweep to {args.out}")
    return 0


def cmd_report(args) -> int:
    report = fileio.read_report(args.eval_report)
    missing = [r.id for r in report.records if r.truth_pct is None]
    if missing:
        raise MetricError(f"records without truth values: {missing[:5]}")
    fileio.write_scatter(report.records, args.out)
    print(f"wrote {len(report.records)} scatter points to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oodeval",
        description="Predict OOD-detector performance on unlabeled score sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic suite (score files + manifest)")
    _add_suite_args(p)
    p.add_argument("--n-val", type=int, default=DEFAULT_VAL_SIZE)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("score", help="logit file -> detector score file")
    p.add_argument("--logits", required=True)
    p.add_argument("--detector", choices=DETECTORS, required=True)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("fit", help="train the Gscore->performance regression")
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="train", choices=("train", "test"))
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--distance", choices=DISTANCES, required=True)
    p.add_argument("--metric", default="fpr@tpr:0.95")
    p.add_argument("--val", default=None, help="IND validation score file (required for ude)")
    p.add_argument("--tau", type=float, default=None, help="fix tau instead of tuning")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="model file path")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict performance for unlabeled score files")
    p.add_argument("--model", required=True)
    p.add_argument("--val", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("scores", nargs="+", help="score files, one set each")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="evaluate a model against a labeled manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="test", choices=("train", "test"))
    p.add_argument("--val", default=None)
    p.add_argument("--out", required=True, help="report CSV path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="ratio/size robustness grid (correlation per cell)")
    _add_suite_args(p)
    p.add_argument("--n-val", type=int, default=DEFAULT_VAL_SIZE)
    p.add_argument("--method", choices=METHODS, default="ude")
    p.add_argument("--distance", choices=DISTANCES, default="wasserstein")
    p.add_argument("--metric", default="fpr@tpr:0.95")
    p.add_argument("--tau", type=float, default=0.99)
    p.add_argument("--ratios", default="", help="comma list like 1:100,1:10,1:1")
    p.add_argument("--sizes", default="", help="comma list of total set sizes")
    p.add_argument("--varied", action="store_true", help="independent sizes from [100, N]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="eval report -> (Gscore, truth) scatter data")
    p.add_argument("--eval-report", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(f"error {exc.code}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
