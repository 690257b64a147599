"""Score sets, detector scores from logits, and supervised evaluation metrics.

Convention throughout the toolkit: an OOD score is a scalar where *higher
means more likely in-distribution (IND)*. All metrics return fractions in
[0, 1]; user-facing reports convert to percent at the I/O layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, MetricError, UndefinedStatError

IND = "ind"
OOD = "ood"
UNKNOWN = "unknown"

DETECTORS = ("msp", "odin_t", "energy", "mls")

# Temperature used by ODIN-style scaling when none is given explicitly.
DEFAULT_ODIN_TEMPERATURE = 1000.0


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InputError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise InputError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class ScoreSet:
    """Per-sample OOD scores with optional IND/OOD labels.

    ``labels`` is a boolean mask (True = IND) aligned with ``scores``, or
    None for an unlabeled set. Arrays are made read-only so instances are
    safe to share across workers.
    """

    scores: np.ndarray
    labels: np.ndarray | None = None
    id: str = ""

    def __post_init__(self):
        scores = _as_float_array(self.scores, "scores")
        scores.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=bool)
            if labels.shape != scores.shape:
                raise InputError("labels length must match scores length")
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @classmethod
    def from_parts(cls, ind_scores, ood_scores, id: str = "") -> "ScoreSet":
        ind = np.asarray(ind_scores, dtype=np.float64)
        ood = np.asarray(ood_scores, dtype=np.float64)
        scores = np.concatenate([ind, ood])
        labels = np.concatenate([np.ones(ind.size, bool), np.zeros(ood.size, bool)])
        return cls(scores=scores, labels=labels, id=id)

    @property
    def n(self) -> int:
        return int(self.scores.size)

    @property
    def is_labeled(self) -> bool:
        return self.labels is not None

    def ind_scores(self) -> np.ndarray:
        self._require_labels()
        return self.scores[self.labels]

    def ood_scores(self) -> np.ndarray:
        self._require_labels()
        return self.scores[~self.labels]

    def _require_labels(self):
        if self.labels is None:
            raise MetricError(f"set {self.id!r} has no labels")

    def require_both_classes(self):
        self._require_labels()
        n_ind = int(self.labels.sum())
        if n_ind == 0 or n_ind == self.n:
            raise MetricError(f"set {self.id!r} needs at least one IND and one OOD sample")


@dataclass(frozen=True)
class LogitRow:
    """One sample's classifier logits, carrier for detector score computation."""

    sample_id: str
    logits: np.ndarray
    label: str = UNKNOWN

    def __post_init__(self):
        logits = _as_float_array(self.logits, "logits")
        if logits.size < 2:
            raise InputError("logits need at least two classes")
        logits.setflags(write=False)
        object.__setattr__(self, "logits", logits)
        if self.label not in (IND, OOD, UNKNOWN):
            raise InputError(f"bad label {self.label!r}")


def detector_scores(logits, method: str, temperature: float | None = None) -> np.ndarray:
    """Vectorized detector scores for an (n, C) logit matrix.

    All four detectors are oriented so that higher output means more IND;
    in particular the energy score is returned as +T*logsumexp(l/T).
    """
    if method not in DETECTORS:
        raise InputError(f"unknown detector {method!r}")
    if temperature is None:
        temperature = DEFAULT_ODIN_TEMPERATURE if method == "odin_t" else 1.0
    if not np.isfinite(temperature) or temperature <= 0:
        raise InputError("temperature must be a positive real")
    mat = np.asarray(logits, dtype=np.float64)
    if mat.ndim == 1:
        mat = mat[None, :]
    if mat.shape[1] < 2:
        raise InputError("logits need at least two classes")
    if not np.all(np.isfinite(mat)):
        raise InputError("logits contain non-finite values")

    if method == "mls":
        return mat.max(axis=1)
    t = 1.0 if method == "msp" else float(temperature)
    scaled = mat / t
    shifted = scaled - scaled.max(axis=1, keepdims=True)
    if method == "energy":
        lse = np.log(np.exp(shifted).sum(axis=1)) + scaled.max(axis=1)
        return t * lse
    expd = np.exp(shifted)
    return expd.max(axis=1) / expd.sum(axis=1)


def detector_score(row, method: str, temperature: float | None = None) -> float:
    """Detector score for a single LogitRow (or raw logit vector)."""
    logits = row.logits if isinstance(row, LogitRow) else row
    return float(detector_scores(logits, method, temperature)[0])


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned their mean rank."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auroc(s: ScoreSet) -> float:
    """P(random IND score > random OOD score), ties counting one half.

    Computed by rank-sum in O(n log n); contractually identical to the
    brute-force count over all IND/OOD pairs.
    """
    s.require_both_classes()
    ranks = _average_ranks(s.scores)
    n_ind = int(s.labels.sum())
    n_ood = s.n - n_ind
    rank_sum = float(ranks[s.labels].sum())
    u = rank_sum - n_ind * (n_ind + 1) / 2.0
    return u / (n_ind * n_ood)


def _threshold_candidates(scores: np.ndarray) -> np.ndarray:
    """Observed score values plus -inf; predictions are IND iff score > t."""
    return np.concatenate([[-np.inf], np.unique(scores)])


def _rates_at(s: ScoreSet, thresholds: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ind = np.sort(s.ind_scores())
    ood = np.sort(s.ood_scores())
    tpr = 1.0 - np.searchsorted(ind, thresholds, side="right") / ind.size
    fpr = 1.0 - np.searchsorted(ood, thresholds, side="right") / ood.size
    return tpr, fpr


def fpr_at_tpr(s: ScoreSet, q: float) -> float:
    """FPR at the largest threshold whose TPR still reaches ``q``."""
    if not 0.0 < q < 1.0:
        raise InputError("q must lie in (0, 1)")
    s.require_both_classes()
    cands = _threshold_candidates(s.scores)
    tpr, fpr = _rates_at(s, cands)
    ok = np.flatnonzero(tpr >= q)
    # -inf always qualifies (TPR = 1), so ok is never empty; candidates are
    # sorted ascending, hence the last qualifying index is the largest t.
    return float(fpr[ok[-1]])


def detection_error(s: ScoreSet) -> float:
    """Minimum balanced error 0.5*FNR + 0.5*FPR over all thresholds."""
    s.require_both_classes()
    cands = _threshold_candidates(s.scores)
    tpr, fpr = _rates_at(s, cands)
    return float(np.min(0.5 * (1.0 - tpr) + 0.5 * fpr))


def aupr(s: ScoreSet) -> float:
    """Area under the precision-recall curve with IND as the positive class.

    Points are taken at each distinct score value in descending order
    (tied samples enter together); the curve is anchored at recall 0 with
    the precision of the top-ranked group and integrated by trapezoid
    over recall.
    """
    s.require_both_classes()
    order = np.argsort(-s.scores, kind="mergesort")
    sorted_scores = s.scores[order]
    sorted_ind = s.labels[order].astype(np.float64)
    # Last index of each tied group of equal scores.
    boundary = np.flatnonzero(np.diff(sorted_scores) != 0.0)
    group_end = np.concatenate([boundary, [s.n - 1]])
    tp = np.cumsum(sorted_ind)[group_end]
    n_seen = group_end + 1.0
    recall = tp / float(s.labels.sum())
    precision = tp / n_seen
    r = np.concatenate([[0.0], recall])
    p = np.concatenate([[precision[0]], precision])
    return float(np.sum(np.diff(r) * 0.5 * (p[1:] + p[:-1])))


def _paired(xs, ys) -> tuple[np.ndarray, np.ndarray]:
    x = _as_float_array(xs, "xs")
    y = _as_float_array(ys, "ys")
    if x.size != y.size:
        raise InputError("sequences must have equal length")
    if x.size < 2:
        raise InputError("need at least two points")
    return x, y


def pearson(xs, ys) -> float:
    """Product-moment correlation; raises on constant input."""
    x, y = _paired(xs, ys)
    xm = x - x.mean()
    ym = y - y.mean()
    denom = np.sqrt((xm * xm).sum() * (ym * ym).sum())
    if denom == 0.0:
        raise UndefinedStatError("correlation undefined for constant input")
    return float((xm * ym).sum() / denom)


def spearman(xs, ys) -> float:
    """Pearson correlation of average ranks."""
    x, y = _paired(xs, ys)
    return pearson(_average_ranks(x), _average_ranks(y))


def rmse(pred, truth) -> float:
    p, t = _paired(pred, truth)
    return float(np.sqrt(np.mean((p - t) ** 2)))


@dataclass(frozen=True)
class TargetMetric:
    """A performance metric used as the regression target.

    kind is one of fpr@tpr (with level q), auroc, de, aupr.
    """

    kind: str
    q: float | None = None

    _KINDS = ("fpr@tpr", "auroc", "de", "aupr")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise InputError(f"unknown metric {self.kind!r}")
        if self.kind == "fpr@tpr":
            q = 0.95 if self.q is None else float(self.q)
            if not 0.0 < q < 1.0:
                raise InputError("tpr level must lie in (0, 1)")
            object.__setattr__(self, "q", q)
        elif self.q is not None:
            raise InputError(f"metric {self.kind} takes no tpr level")

    @classmethod
    def parse(cls, text: str) -> "TargetMetric":
        if text.startswith("fpr@tpr"):
            rest = text[len("fpr@tpr") :]
            if rest == "":
                return cls("fpr@tpr")
            if not rest.startswith(":"):
                raise InputError(f"bad metric spec {text!r}")
            try:
                return cls("fpr@tpr", float(rest[1:]))
            except ValueError:
                raise InputError(f"bad metric spec {text!r}") from None
        return cls(text)

    @property
    def name(self) -> str:
        if self.kind == "fpr@tpr":
            return f"fpr@tpr:{self.q:g}"
        return self.kind

    def compute(self, s: ScoreSet) -> float:
        """Evaluate this metric on a labeled set, as a fraction in [0, 1]."""
        if self.kind == "fpr@tpr":
            return fpr_at_tpr(s, self.q)
        if self.kind == "auroc":
            return auroc(s)
        if self.kind == "de":
            return detection_error(s)
        return aupr(s)


@dataclass(frozen=True)
class SetRecord:
    """One evaluated set: latent truth (if labeled) vs predicted value, in percent."""

    id: str
    metric: str
    truth_pct: float | None
    pred_pct: float
    gscore: float
    degenerate: bool


@dataclass(frozen=True)
class MetricReport:
    """Per-set records plus suite-level summary statistics.

    rmse_pct is in percentage points; pearson/spearman are the correlations
    between Gscore and the latent truth across the suite.
    """

    records: tuple[SetRecord, ...] = field(default_factory=tuple)
    rmse_pct: float = 0.0
    pearson: float = 0.0
    spearman: float = 0.0

    def __post_init__(self):
        if self.rmse_pct < 0:
            raise InputError("rmse must be non-negative")
        for name in ("pearson", "spearman"):
            v = getattr(self, name)
            if not -1.0 - 1e-12 <= v <= 1.0 + 1e-12:
                raise InputError(f"{name} outside [-1, 1]")
