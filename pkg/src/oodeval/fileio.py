"""Strict, versioned file formats.

Score and logit files are versioned implicitly by their exact pinned
header; manifest, model, report, prediction and sweep files carry an
explicit format_version. All writers are atomic (temp file + rename) and
all floats are written with 17 significant digits, so every file written
by this tool re-parses losslessly.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import FormatVersionError, ParseError
from .scores import IND, OOD, UNKNOWN, MetricReport, ScoreSet, SetRecord

SCORE_HEADER = ["sample_id", "score", "label"]
REPORT_HEADER = [
    "record_type", "id", "metric", "truth_pct", "pred_pct", "gscore",
    "degenerate", "rmse_pct", "pearson", "spearman", "n_sets", "format_version",
]
PREDICTIONS_HEADER = ["id", "gscore", "pred_pct", "degenerate", "format_version"]
SWEEP_HEADER = ["cell", "n_sets", "pearson", "spearman", "format_version"]
SCATTER_HEADER = ["id", "gscore", "truth_pct", "format_version"]
REPORT_FORMAT_VERSION = 1


def atomic_write_text(path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a
    partially written file."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_score_file(s: ScoreSet, path, sample_ids=None) -> None:
    if sample_ids is not None and len(sample_ids) != s.n:
        raise ParseError("sample_ids length must match scores length", path=path)
    lines = [",".join(SCORE_HEADER)]
    for i in range(s.n):
        if s.labels is None:
            label = UNKNOWN
        else:
            label = IND if s.labels[i] else OOD
        sid = f"sample{i:06d}" if sample_ids is None else sample_ids[i]
        lines.append(f"{sid},{_fmt(s.scores[i])},{label}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def parse_score_file(path) -> ScoreSet:
    """Strict ScoreFile parser.

    Labels are case-insensitive; a file must be either fully labeled
    (every row ind/ood) or fully unknown — unknown labels yield an
    unlabeled set and mixing is a parse error, as are duplicate sample
    ids and non-finite scores.
    """
    scores: list[float] = []
    flags: list[bool] = []
    seen: set[str] = set()
    n_unknown = 0
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SCORE_HEADER:
            raise ParseError("bad score-file header", path=path, line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 3:
                raise ParseError("expected sample_id,score,label", path=path, line=lineno)
            sample_id, score_text, label = row
            if sample_id in seen:
                raise ParseError(f"duplicate sample_id {sample_id!r}", path=path, line=lineno)
            seen.add(sample_id)
            try:
                value = float(score_text)
            except ValueError:
                raise ParseError(f"bad score {score_text!r}", path=path, line=lineno) from None
            if not np.isfinite(value):
                raise ParseError(f"non-finite score {score_text!r}", path=path, line=lineno)
            label = label.strip().lower()
            if label == UNKNOWN:
                n_unknown += 1
                flags.append(False)
            elif label in (IND, OOD):
                flags.append(label == IND)
            else:
                raise ParseError(f"bad label {label!r}", path=path, line=lineno)
            scores.append(value)
    if not scores:
        raise ParseError("score file has no rows", path=path)
    if 0 < n_unknown < len(scores):
        raise ParseError("file mixes known and unknown labels", path=path)
    stem = os.path.splitext(os.path.basename(os.fspath(path)))[0]
    labels = None if n_unknown else np.array(flags, dtype=bool)
    return ScoreSet(scores=np.array(scores), labels=labels, id=stem)


@dataclass(frozen=True)
class LogitTable:
    """Parsed LogitFile: one row of C logits per sample."""

    sample_ids: tuple[str, ...]
    labels: tuple[str, ...]
    logits: np.ndarray

    @property
    def n_classes(self) -> int:
        return int(self.logits.shape[1])


def logit_header(n_classes: int) -> list[str]:
    return ["sample_id", "label"] + [f"l_{i}" for i in range(n_classes)]


def write_logit_file(table: LogitTable, path) -> None:
    lines = [",".join(logit_header(table.n_classes))]
    for sid, label, row in zip(table.sample_ids, table.labels, table.logits):
        lines.append(",".join([sid, label] + [_fmt(v) for v in row]))
    atomic_write_text(path, "\n".join(lines) + "\n")


def parse_logit_file(path) -> LogitTable:
    """Strict LogitFile parser: constant class count, finite logits."""
    ids: list[str] = []
    labels: list[str] = []
    rows: list[list[float]] = []
    n_classes = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 4 or header[:2] != ["sample_id", "label"]:
            raise ParseError("bad logit-file header", path=path, line=1)
        if header[2:] != [f"l_{i}" for i in range(len(header) - 2)]:
            raise ParseError("bad logit-file header", path=path, line=1)
        n_classes = len(header) - 2
        seen: set[str] = set()
        for lineno, row in enumerate(reader, start=2):
            if len(row) != n_classes + 2:
                raise ParseError("wrong field count", path=path, line=lineno)
            sid, label = row[0], row[1].strip().lower()
            if sid in seen:
                raise ParseError(f"duplicate sample_id {sid!r}", path=path, line=lineno)
            seen.add(sid)
            if label not in (IND, OOD, UNKNOWN):
                raise ParseError(f"bad label {label!r}", path=path, line=lineno)
            try:
                values = [float(v) for v in row[2:]]
            except ValueError:
                raise ParseError("bad logit value", path=path, line=lineno) from None
            if not all(np.isfinite(values)):
                raise ParseError("non-finite logit", path=path, line=lineno)
            ids.append(sid)
            labels.append(label)
            rows.append(values)
    if not rows:
        raise ParseError("logit file has no rows", path=path)
    return LogitTable(tuple(ids), tuple(labels), np.array(rows, dtype=np.float64))


def write_report(report: MetricReport, path) -> None:
    """Eval report CSV: one row per set plus a summary row, percent scale."""
    lines = [",".join(REPORT_HEADER)]
    for r in report.records:
        truth = "" if r.truth_pct is None else _fmt(r.truth_pct)
        lines.append(
            f"set,{r.id},{r.metric},{truth},{_fmt(r.pred_pct)},{_fmt(r.gscore)},"
            f"{int(r.degenerate)},,,,,{REPORT_FORMAT_VERSION}"
        )
    lines.append(
        f"summary,,,,,,,{_fmt(report.rmse_pct)},{_fmt(report.pearson)},"
        f"{_fmt(report.spearman)},{len(report.records)},{REPORT_FORMAT_VERSION}"
    )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_report(path) -> MetricReport:
    records: list[SetRecord] = []
    summary = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != REPORT_HEADER:
            raise ParseError("bad report header", path=path, line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(REPORT_HEADER):
                raise ParseError("wrong field count", path=path, line=lineno)
            if row[11] != str(REPORT_FORMAT_VERSION):
                raise FormatVersionError(f"unsupported report format_version {row[11]!r}")
            try:
                if row[0] == "set":
                    records.append(
                        SetRecord(
                            id=row[1], metric=row[2],
                            truth_pct=float(row[3]) if row[3] else None,
                            pred_pct=float(row[4]), gscore=float(row[5]),
                            degenerate=bool(int(row[6])),
                        )
                    )
                elif row[0] == "summary":
                    summary = (float(row[7]), float(row[8]), float(row[9]))
                else:
                    raise ParseError(f"bad record_type {row[0]!r}", path=path, line=lineno)
            except ValueError:
                raise ParseError("bad numeric field", path=path, line=lineno) from None
    if summary is None:
        raise ParseError("report has no summary row", path=path)
    return MetricReport(
        records=tuple(records), rmse_pct=summary[0], pearson=summary[1], spearman=summary[2]
    )


def write_predictions(rows: list[tuple[str, float, float, bool]], path) -> None:
    """Prediction CSV rows: (set id, gscore, predicted percent, degenerate)."""
    lines = [",".join(PREDICTIONS_HEADER)]
    for set_id, g, pred_pct, degenerate in rows:
        lines.append(
            f"{set_id},{_fmt(g)},{_fmt(pred_pct)},{int(degenerate)},{REPORT_FORMAT_VERSION}"
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_predictions(path) -> list[tuple[str, float, float, bool]]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != PREDICTIONS_HEADER:
            raise ParseError("bad predictions header", path=path, line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(PREDICTIONS_HEADER):
                raise ParseError("wrong field count", path=path, line=lineno)
            if row[4] != str(REPORT_FORMAT_VERSION):
                raise FormatVersionError(f"unsupported predictions format_version {row[4]!r}")
            out.append((row[0], float(row[1]), float(row[2]), bool(int(row[3]))))
    return out


def write_sweep(rows: list[tuple[str, int, float, float]], path) -> None:
    """Sweep CSV rows: (cell name, set count, pearson, spearman)."""
    lines = [",".join(SWEEP_HEADER)]
    for cell, n_sets, g, s in rows:
        lines.append(f"{cell},{n_sets},{_fmt(g)},{_fmt(s)},{REPORT_FORMAT_VERSION}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_sweep(path) -> list[tuple[str, int, float, float]]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != SWEEP_HEADER:
            raise ParseError("bad sweep header", path=path, line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(SWEEP_HEADER):
                raise ParseError("wrong field count", path=path, line=lineno)
            if row[4] != str(REPORT_FORMAT_VERSION):
                raise FormatVersionError(f"unsupported sweep format_version {row[4]!r}")
            out.append((row[0], int(row[1]), float(row[2]), float(row[3])))
    return out


def write_scatter(records: tuple[SetRecord, ...], path) -> None:
    """Scatter-data CSV of (Gscore, truth) pairs for correlation plots."""
    lines = [",".join(SCATTER_HEADER)]
    for r in records:
        truth = "" if r.truth_pct is None else _fmt(r.truth_pct)
        lines.append(f"{r.id},{_fmt(r.gscore)},{truth},{REPORT_FORMAT_VERSION}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_scatter(path) -> list[tuple[str, float, float | None]]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != SCATTER_HEADER:
            raise ParseError("bad scatter header", path=path, line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(SCATTER_HEADER):
                raise ParseError("wrong field count", path=path, line=lineno)
            if row[3] != str(REPORT_FORMAT_VERSION):
                raise FormatVersionError(f"unsupported scatter format_version {row[3]!r}")
            out.append((row[0], float(row[1]), float(row[2]) if row[2] else None))
    return out
