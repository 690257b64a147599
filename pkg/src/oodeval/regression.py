"""Gscore-to-performance regression: training on a labeled meta-suite,
threshold (tau) search, prediction on unlabeled sets, and evaluation.

Performance values are fractions in [0, 1] internally; reports convert
to percent. One model is fit per (method, distance, tau, target metric)
combination and never mixes metrics.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ConfigError,
    DegenerateError,
    FormatVersionError,
    IllConditionedError,
    InputError,
    LeakageError,
    MetricError,
    ParseError,
)
from .fileio import atomic_write_text
from .fitting import SIGMA_FLOOR, GaussianParams
from .gscore import GscoreConfig, compute_gscore, compute_gscore_fit
from .scores import MetricReport, ScoreSet, SetRecord, TargetMetric, pearson, rmse, spearman

MODEL_FORMAT_VERSION = 1

# Endpoint clamp for the tau grid; tau itself must stay inside (0, 1).
TAU_EPS = 1e-6


@dataclass(frozen=True)
class MetaSuite:
    """Ordered collection of score sets with unique ids."""

    sets: tuple[ScoreSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        ids = [s.id for s in self.sets]
        if len(set(ids)) != len(ids):
            raise InputError("meta-suite ids must be unique")

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.sets)

    @property
    def labeled(self) -> bool:
        return all(s.is_labeled for s in self.sets)

    def require_labeled(self):
        for s in self.sets:
            s.require_both_classes()


@dataclass(frozen=True)
class RegressionModel:
    """Linear map p = theta1 * Gscore + theta0 for one target metric."""

    theta1: float
    theta0: float
    cfg: GscoreConfig
    target_metric: TargetMetric
    train_loss: float
    n_train: int
    train_ids: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n_train < 2:
            raise InputError("a regression model needs at least two training points")
        if not np.isfinite(self.train_loss):
            raise InputError("train_loss must be finite")


def _ols(gs: np.ndarray, ps: np.ndarray) -> tuple[float, float, float]:
    gm = gs - gs.mean()
    denom = float((gm * gm).sum())
    if denom == 0.0:
        raise IllConditionedError("all Gscores identical; regression is ill-conditioned")
    theta1 = float((gm * (ps - ps.mean())).sum()) / denom
    theta0 = float(ps.mean() - theta1 * gs.mean())
    resid = ps - (theta1 * gs + theta0)
    return theta1, theta0, float(np.mean(resid * resid))


def fit_regression(
    points,
    cfg: GscoreConfig | None = None,
    target_metric: TargetMetric | None = None,
    train_ids: tuple[str, ...] = (),
) -> RegressionModel:
    """Closed-form least squares over (gscore, performance) points.

    ``cfg``/``target_metric`` are carried as provenance; prediction
    requires them, bare regression use does not.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise InputError("need at least two (gscore, performance) points")
    if not np.all(np.isfinite(pts)):
        raise InputError("regression points must be finite")
    theta1, theta0, loss = _ols(pts[:, 0], pts[:, 1])
    return RegressionModel(
        theta1=theta1,
        theta0=theta0,
        cfg=cfg,
        target_metric=target_metric,
        train_loss=loss,
        n_train=pts.shape[0],
        train_ids=train_ids,
    )


def suite_gscores(
    meta: MetaSuite, cfg: GscoreConfig, val: GaussianParams | None
) -> np.ndarray:
    return np.array([compute_gscore(s, val, cfg) for s in meta], dtype=np.float64)


def suite_truths(meta: MetaSuite, target: TargetMetric) -> np.ndarray:
    return np.array([target.compute(s) for s in meta], dtype=np.float64)


def train_on_suite(
    meta: MetaSuite,
    cfg: GscoreConfig,
    target: TargetMetric,
    val: GaussianParams | None = None,
) -> RegressionModel:
    """Compute Gscores and latent truths over a labeled suite, then fit."""
    meta.require_labeled()
    gs = suite_gscores(meta, cfg, val)
    ps = suite_truths(meta, target)
    return fit_regression(np.column_stack([gs, ps]), cfg, target, meta.ids)


def _tau_grid_stage1() -> list[float]:
    return [min(max(k / 10.0, TAU_EPS), 1.0 - TAU_EPS) for k in range(11)]


def _tau_grid_stage2(center: float) -> list[float]:
    lo = max(TAU_EPS, center - 0.5)
    hi = min(1.0 - TAU_EPS, center + 0.5)
    grid = [lo + 0.01 * k for k in range(int((hi - lo) / 0.01) + 1)]
    if grid[-1] < hi - 1e-12:
        grid.append(hi)
    grid.append(center)
    return sorted(set(round(t, 12) for t in grid))


def tune_tau(
    meta: MetaSuite,
    cfg_base: GscoreConfig,
    target: TargetMetric,
    val: GaussianParams | None = None,
) -> tuple[float, RegressionModel]:
    """Two-stage tau search minimizing regression train loss.

    Stage 1 scans tau over 0..1 in steps of 0.1 (endpoints clamped into
    (0, 1)); stage 2 re-scans tau_hat +/- 0.5, clipped, in steps of 0.01.
    Returns the scanned tau with minimal loss, ties broken toward the
    smaller tau; the tuning-time model at that tau is reused. k-means has
    no tau and passes through; Gscores are recomputed per tau only for
    methods whose fit depends on it (UDE).
    """
    meta.require_labeled()
    if cfg_base.method == "kmeans":
        model = train_on_suite(meta, cfg_base, target, val)
        return cfg_base.tau, model

    truths = suite_truths(meta, target)
    tau_sensitive = cfg_base.method == "ude"
    cached_gs = None

    def evaluate(tau: float):
        nonlocal cached_gs
        cfg = replace(cfg_base, tau=tau)
        if tau_sensitive:
            gs = suite_gscores(meta, cfg, val)
        else:
            if cached_gs is None:
                cached_gs = suite_gscores(meta, cfg, val)
            gs = cached_gs
        try:
            model = fit_regression(np.column_stack([gs, truths]), cfg, target, meta.ids)
        except IllConditionedError:
            return None
        return model

    scanned: list[tuple[float, RegressionModel]] = []
    for tau in _tau_grid_stage1():
        model = evaluate(tau)
        if model is not None:
            scanned.append((tau, model))
    if not scanned:
        raise DegenerateError("every scanned tau produced degenerate Gscores")
    center = min(scanned, key=lambda tm: (tm[1].train_loss, tm[0]))[0]
    for tau in _tau_grid_stage2(center):
        model = evaluate(tau)
        if model is not None:
            scanned.append((tau, model))
    tau_op, model = min(scanned, key=lambda tm: (tm[1].train_loss, tm[0]))
    return tau_op, model


def predict(
    model: RegressionModel, scores: ScoreSet, val: GaussianParams | None = None
) -> float:
    """Predicted performance for one set, clamped to the metric range [0, 1]."""
    if model.cfg is None:
        raise ConfigError("model carries no Gscore configuration")
    if model.cfg.method == "ude" and val is None:
        raise ConfigError("model requires validation parameters (UDE)")
    g = compute_gscore(scores, val, model.cfg)
    return float(min(1.0, max(0.0, model.theta1 * g + model.theta0)))


def evaluate_suite(
    model: RegressionModel, test: MetaSuite, val: GaussianParams | None = None
) -> MetricReport:
    """Per-set truth vs prediction over a labeled test suite.

    Refuses any id overlap with the model's training sets. Summary RMSE
    is in percentage points; the correlations relate Gscore to truth.
    """
    test.require_labeled()
    overlap = set(model.train_ids) & set(test.ids)
    if overlap:
        raise LeakageError(f"test sets overlap training ids: {sorted(overlap)[:5]}")
    if model.cfg is None or model.target_metric is None:
        raise ConfigError("model carries no Gscore configuration")
    if model.cfg.method == "ude" and val is None:
        raise ConfigError("model requires validation parameters (UDE)")
    if len(test) < 2:
        raise MetricError("evaluation needs at least two test sets")
    records = []
    gs, truths, preds = [], [], []
    for s in test:
        g, fit = compute_gscore_fit(s, val, model.cfg)
        truth = model.target_metric.compute(s)
        pred = float(min(1.0, max(0.0, model.theta1 * g + model.theta0)))
        records.append(
            SetRecord(
                id=s.id,
                metric=model.target_metric.name,
                truth_pct=100.0 * truth,
                pred_pct=100.0 * pred,
                gscore=g,
                degenerate=fit.degenerate,
            )
        )
        gs.append(g)
        truths.append(truth)
        preds.append(pred)
    return MetricReport(
        records=tuple(records),
        rmse_pct=100.0 * rmse(preds, truths),
        pearson=pearson(gs, truths),
        spearman=spearman(gs, truths),
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_model(model: RegressionModel, path) -> None:
    """Write the model file (UTF-8 text, one key = value per line).

    All fits are deterministic regardless of seed, so the config's seed
    is not serialized.
    """
    if model.cfg is None or model.target_metric is None:
        raise ConfigError("cannot serialize a model without cfg and target metric")
    lines = [
        f"method = {model.cfg.method}",
        f"distance = {model.cfg.distance}",
        f"tau = {_fmt(model.cfg.tau)}",
        f"theta1 = {_fmt(model.theta1)}",
        f"theta0 = {_fmt(model.theta0)}",
        f"target_metric = {model.target_metric.kind}",
    ]
    if model.target_metric.kind == "fpr@tpr":
        lines.append(f"tpr_q = {_fmt(model.target_metric.q)}")
    lines += [
        f"train_loss = {_fmt(model.train_loss)}",
        f"n_train = {model.n_train}",
        f"sigma_floor = {_fmt(SIGMA_FLOOR)}",
        f"format_version = {MODEL_FORMAT_VERSION}",
        f"train_ids = {','.join(model.train_ids)}",
    ]
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_model(path) -> RegressionModel:
    """Parse a model file; exact round-trip for the decimals written."""
    fields: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if " = " not in line:
                raise ParseError("expected 'key = value'", path=path, line=lineno)
            key, value = line.split(" = ", 1)
            fields[key] = value
    version = fields.get("format_version")
    if version != str(MODEL_FORMAT_VERSION):
        raise FormatVersionError(f"unsupported model format_version {version!r}")
    try:
        target = TargetMetric(
            fields["target_metric"],
            float(fields["tpr_q"]) if "tpr_q" in fields else None,
        )
        cfg = GscoreConfig(
            method=fields["method"],
            distance=fields["distance"],
            tau=float(fields["tau"]),
        )
        ids = fields.get("train_ids", "")
        return RegressionModel(
            theta1=float(fields["theta1"]),
            theta0=float(fields["theta0"]),
            cfg=cfg,
            target_metric=target,
            train_loss=float(fields["train_loss"]),
            n_train=int(fields["n_train"]),
            train_ids=tuple(ids.split(",")) if ids else (),
        )
    except KeyError as exc:
        raise ParseError(f"missing model field {exc.args[0]!r}", path=path) from None
    except ValueError as exc:
        raise ParseError(f"bad model field value: {exc}", path=path) from None
