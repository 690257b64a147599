"""Synthetic benchmark suites: score sets with controlled separability,
IND:OOD ratio and size, plus label-based or closed-form ground truth.

All generation is a pure function of the spec (including its seed);
per-set seeds derive from the suite seed by splitmix64 so parallel and
sequential generation agree.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from statistics import NormalDist

import numpy as np

from .errors import FormatVersionError, GenerationError, InputError, ParseError
from .fileio import atomic_write_text
from .regression import MetaSuite
from .scores import ScoreSet

FAMILIES = ("gaussian", "logit_normal")

MANIFEST_HEADER = [
    "id", "family", "mu_ind", "sigma_ind", "mu_ood", "sigma_ood",
    "n_ind", "n_ood", "seed", "split", "format_version",
]
MANIFEST_FORMAT_VERSION = 1

# Separability targets are capped here so one near-perfect set cannot
# dominate the regression with an unbounded component gap; a degenerate
# [1, 1] span instead places the components far enough apart that no
# sample pair inverts.
_AUROC_CAP = 0.9995
_SEPARATED_GAP_SIGMAS = 9.0

_MASK64 = (1 << 64) - 1


def splitmix64(seed: int, index: int) -> int:
    """Deterministic per-index stream seed derived from a master seed."""
    z = (seed + 0x9E3779B97F4A7C15 * (index + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class SynthSpec:
    """Generative parameters of one synthetic score set.

    For the logit_normal family the component parameters live in logit
    space and draws are squashed through the logistic function, keeping
    scores in (0, 1).
    """

    id: str
    family: str
    mu_ind: float
    sigma_ind: float
    mu_ood: float
    sigma_ood: float
    n_ind: int
    n_ood: int
    seed: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}")
        if self.sigma_ind <= 0 or self.sigma_ood <= 0:
            raise InputError("sigmas must be positive")
        if self.n_ind < 1 or self.n_ood < 1:
            raise InputError("counts must be at least 1")


@dataclass(frozen=True)
class SuiteSpec:
    """Generator for a train/test pair of meta-suites.

    Component gaps are sampled so empirical AUROC covers ``span`` roughly
    uniformly (stratified targets with jitter). The IND component is
    shared by every set, mirroring a fixed IND source mixed with varying
    OOD sets; per-set count jitter scales both sides together so the
    IND:OOD ratio is preserved.
    """

    n_train: int = 150
    n_test: int = 50
    span: tuple[float, float] = (0.55, 1.0)
    family: str = "logit_normal"
    mu_ind: float = 1.5
    sigma_ind: float = 1.5
    sigma_ood_jitter: tuple[float, float] = (0.95, 1.05)
    n_ind: int = 2000
    n_ood: int = 2000
    count_jitter: float = 0.2
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.span
        if not (0.5 < lo <= hi <= 1.0):
            raise GenerationError(f"span {self.span} not within (0.5, 1.0]")
        if self.n_train < 1 or self.n_test < 0:
            raise GenerationError("need at least one train set")


def gen_score_set(spec: SynthSpec) -> ScoreSet:
    """Labeled draws from the two components; deterministic given seed."""
    rng = np.random.default_rng(spec.seed)
    ind = rng.normal(spec.mu_ind, spec.sigma_ind, spec.n_ind)
    ood = rng.normal(spec.mu_ood, spec.sigma_ood, spec.n_ood)
    if spec.family == "logit_normal":
        ind = 1.0 / (1.0 + np.exp(-ind))
        ood = 1.0 / (1.0 + np.exp(-ood))
    return ScoreSet.from_parts(ind, ood, id=spec.id)


def gaussian_auroc(mu_ind: float, sigma_ind: float, mu_ood: float, sigma_ood: float) -> float:
    """Closed-form AUROC of two Gaussian components.

    Also exact for logit_normal sets (the squash is strictly increasing).
    """
    return NormalDist().cdf((mu_ind - mu_ood) / math.hypot(sigma_ind, sigma_ood))


def plan_suite(spec: SuiteSpec) -> list[tuple[SynthSpec, str]]:
    """Per-set generative specs plus their train/test split."""
    lo, hi = spec.span
    total = spec.n_train + spec.n_test
    rng = np.random.default_rng(splitmix64(spec.seed, 0))
    targets = np.linspace(lo, hi, total) if total > 1 else np.array([(lo + hi) / 2])
    if total > 1:
        step = (hi - lo) / (total - 1)
        targets = np.clip(targets + rng.uniform(-0.4, 0.4, total) * step, lo, hi)
    rng.shuffle(targets)
    separated_only = lo == hi == 1.0
    rows = []
    for i, a in enumerate(targets):
        sigma_ood = spec.sigma_ind * rng.uniform(*spec.sigma_ood_jitter)
        scale = rng.uniform(1.0 - spec.count_jitter, 1.0 + spec.count_jitter)
        n_ind = max(2, round(spec.n_ind * scale))
        n_ood = max(2, round(spec.n_ood * scale))
        if separated_only:
            gap = _SEPARATED_GAP_SIGMAS * (spec.sigma_ind + sigma_ood)
        else:
            z = NormalDist().inv_cdf(min(float(a), _AUROC_CAP))
            gap = z * math.hypot(spec.sigma_ind, sigma_ood)
        split = "train" if i < spec.n_train else "test"
        index = i if split == "train" else i - spec.n_train
        rows.append(
            (
                SynthSpec(
                    id=f"{split}{index:03d}",
                    family=spec.family,
                    mu_ind=spec.mu_ind,
                    sigma_ind=spec.sigma_ind,
                    mu_ood=spec.mu_ind - gap,
                    sigma_ood=sigma_ood,
                    n_ind=n_ind,
                    n_ood=n_ood,
                    seed=splitmix64(spec.seed, i + 1),
                ),
                split,
            )
        )
    return rows


def gen_suite(spec: SuiteSpec) -> tuple[MetaSuite, MetaSuite]:
    """Materialize the planned suite into (train, test) meta-suites."""
    rows = plan_suite(spec)
    train = [gen_score_set(s) for s, split in rows if split == "train"]
    test = [gen_score_set(s) for s, split in rows if split == "test"]
    return MetaSuite(tuple(train)), MetaSuite(tuple(test))


def gen_val_scores(spec: SuiteSpec, n: int, salt: int = 0x56414C) -> ScoreSet:
    """Fresh IND-only draws from the suite's shared IND component."""
    if n < 2:
        raise InputError("validation set needs at least two samples")
    rng = np.random.default_rng(splitmix64(spec.seed, salt))
    draws = rng.normal(spec.mu_ind, spec.sigma_ind, n)
    if spec.family == "logit_normal":
        draws = 1.0 / (1.0 + np.exp(-draws))
    return ScoreSet(scores=draws, labels=np.ones(n, bool), id="val")


def downsample_set(s: ScoreSet, n_ind: int, n_ood: int, seed: int) -> ScoreSet:
    """Membership-only down-sample: scores and labels are never altered."""
    s.require_both_classes()
    rng = np.random.default_rng(seed)
    ind_idx = np.flatnonzero(s.labels)
    ood_idx = np.flatnonzero(~s.labels)
    keep_ind = rng.choice(ind_idx, size=min(n_ind, ind_idx.size), replace=False)
    keep_ood = rng.choice(ood_idx, size=min(n_ood, ood_idx.size), replace=False)
    keep = np.sort(np.concatenate([keep_ind, keep_ood]))
    return ScoreSet(scores=s.scores[keep], labels=s.labels[keep], id=s.id)


def _parse_ratio(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        a, b = int(a), int(b)
    except ValueError:
        raise InputError(f"bad ratio {text!r}; expected like 10:1") from None
    if a < 1 or b < 1:
        raise InputError(f"bad ratio {text!r}; parts must be positive")
    return a, b


def ratio_size_sweep(
    base: SuiteSpec,
    ratios: list[str] = (),
    sizes: list[int] = (),
    varied: bool = False,
    varied_low: int = 100,
) -> dict[str, MetaSuite]:
    """Down-sampled variants of the base train suite.

    Ratios (IND:OOD, like "100:1") shrink the majority side of each 1:1
    set; sizes shrink both sides to size//2 keeping 1:1; ``varied`` draws
    independent per-set sizes uniformly from [varied_low, N] on each side.
    """
    if base.n_ind != base.n_ood:
        raise InputError("ratio/size sweeps need a 1:1 base suite")
    rows = [r for r in plan_suite(base) if r[1] == "train"]
    specs = [s for s, _ in rows]
    sets = [gen_score_set(s) for s in specs]
    out: dict[str, MetaSuite] = {}
    cell_idx = 0
    for text in ratios:
        a, b = _parse_ratio(text)
        cell_idx += 1
        cell_seed = splitmix64(base.seed, 1_000_003 + cell_idx)
        picked = []
        for j, (spec, s) in enumerate(zip(specs, sets)):
            n_ind, n_ood = spec.n_ind, spec.n_ood
            if a < b:
                n_ind = round(spec.n_ind * a / b)
            elif a > b:
                n_ood = round(spec.n_ood * b / a)
            if n_ind < 2 or n_ood < 2:
                raise InputError(f"ratio {text} leaves fewer than 2 samples per side")
            picked.append(downsample_set(s, n_ind, n_ood, splitmix64(cell_seed, j)))
        out[f"ratio={a}:{b}"] = MetaSuite(tuple(picked))
    for size in sizes:
        per_side = int(size) // 2
        if per_side < 2:
            raise InputError(f"size {size} leaves fewer than 2 samples per side")
        cell_idx += 1
        cell_seed = splitmix64(base.seed, 1_000_003 + cell_idx)
        out[f"size={int(size)}"] = MetaSuite(
            tuple(
                downsample_set(s, per_side, per_side, splitmix64(cell_seed, j))
                for j, s in enumerate(sets)
            )
        )
    if varied:
        cell_idx += 1
        cell_seed = splitmix64(base.seed, 1_000_003 + cell_idx)
        picked = []
        for j, (spec, s) in enumerate(zip(specs, sets)):
            if spec.n_ind < varied_low or spec.n_ood < varied_low:
                raise InputError(f"varied mode needs at least {varied_low} samples per side")
            rng = np.random.default_rng(splitmix64(cell_seed, j))
            n_ind = int(rng.integers(varied_low, spec.n_ind + 1))
            n_ood = int(rng.integers(varied_low, spec.n_ood + 1))
            picked.append(downsample_set(s, n_ind, n_ood, splitmix64(cell_seed, j + 1_000_000)))
        out["varied"] = MetaSuite(tuple(picked))
    return out


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_manifest(path, rows: list[tuple[SynthSpec, str]]) -> None:
    """One CSV row per set: generative parameters plus split."""
    lines = [",".join(MANIFEST_HEADER)]
    for spec, split in rows:
        lines.append(
            ",".join(
                [
                    spec.id, spec.family,
                    _fmt(spec.mu_ind), _fmt(spec.sigma_ind),
                    _fmt(spec.mu_ood), _fmt(spec.sigma_ood),
                    str(spec.n_ind), str(spec.n_ood), str(spec.seed),
                    split, str(MANIFEST_FORMAT_VERSION),
                ]
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_manifest(path) -> list[tuple[SynthSpec, str]]:
    rows: list[tuple[SynthSpec, str]] = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise ParseError("bad manifest header", path=path, line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(MANIFEST_HEADER):
                raise ParseError("wrong field count", path=path, line=lineno)
            if row[10] != str(MANIFEST_FORMAT_VERSION):
                raise FormatVersionError(
                    f"unsupported manifest format_version {row[10]!r}"
                )
            if row[0] in seen:
                raise ParseError(f"duplicate id {row[0]!r}", path=path, line=lineno)
            seen.add(row[0])
            if row[9] not in ("train", "test"):
                raise ParseError(f"bad split {row[9]!r}", path=path, line=lineno)
            try:
                spec = SynthSpec(
                    id=row[0], family=row[1],
                    mu_ind=float(row[2]), sigma_ind=float(row[3]),
                    mu_ood=float(row[4]), sigma_ood=float(row[5]),
                    n_ind=int(row[6]), n_ood=int(row[7]), seed=int(row[8]),
                )
            except (ValueError, InputError) as exc:
                raise ParseError(f"bad manifest row: {exc}", path=path, line=lineno) from None
            rows.append((spec, row[9]))
    return rows
