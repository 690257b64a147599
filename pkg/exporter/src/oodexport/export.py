"""Classifier inference over an image folder, emitting logit and score
files in the evaluation toolkit's CSV formats.

The toolkit is consumed only through those file formats: logit files are
`sample_id,label,l_0,...,l_{C-1}`, score files `sample_id,score,label`,
both strict CSV with 17-significant-digit floats. Unreadable images are
skipped and counted in a `<output>.log` sidecar. Output files are written
atomically after inference finishes, so failures leave no partial output.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
import torch
from PIL import Image

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".webp")

LABELS = ("ind", "ood", "unknown")


class ExportError(Exception):
    """Raised for unusable jobs: bad checkpoint, empty folder, bad args."""


@dataclass
class ExportJob:
    checkpoint: str
    data_dir: str
    label: str = "unknown"
    batch_size: int = 64
    device: str = "cpu"
    image_size: int = 32
    out: str = "logits.csv"

    def __post_init__(self):
        if self.label not in LABELS:
            raise ExportError(f"label must be one of {LABELS}, not {self.label!r}")
        if self.batch_size < 1:
            raise ExportError("batch_size must be positive")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(path: str, device: str) -> torch.nn.Module:
    """Load a TorchScript archive or a pickled nn.Module checkpoint."""
    try:
        model = torch.jit.load(path, map_location=device)
    except Exception:
        try:
            model = torch.load(path, map_location=device, weights_only=False)
        except Exception as exc:
            raise ExportError(f"cannot load checkpoint {path}: {exc}") from exc
    if not isinstance(model, torch.nn.Module):
        raise ExportError(f"checkpoint {path} does not contain a module")
    model.eval()
    return model


def list_images(data_dir: str) -> list[str]:
    """Image files under data_dir, sorted for deterministic output order."""
    if not os.path.isdir(data_dir):
        raise ExportError(f"dataset directory not found: {data_dir}")
    found = []
    for root, _, names in os.walk(data_dir):
        for name in names:
            if name.lower().endswith(IMAGE_EXTENSIONS):
                found.append(os.path.relpath(os.path.join(root, name), data_dir))
    return sorted(found)


def _load_batch(data_dir: str, names: list[str], size: int):
    """Decode a batch to a float tensor in [0, 1]; returns kept names too."""
    arrays, kept, skipped = [], [], []
    for name in names:
        try:
            with Image.open(os.path.join(data_dir, name)) as img:
                img = img.convert("RGB").resize((size, size))
                arrays.append(np.asarray(img, dtype=np.float32) / 255.0)
            kept.append(name)
        except (OSError, ValueError) as exc:
            skipped.append((name, str(exc)))
    if not arrays:
        return None, kept, skipped
    batch = torch.from_numpy(np.stack(arrays)).permute(0, 3, 1, 2).contiguous()
    return batch, kept, skipped


def _write_sidecar(out: str, skipped: list[tuple[str, str]]) -> None:
    lines = [f"skipped {len(skipped)} unreadable image(s)"]
    lines += [f"{name}: {reason}" for name, reason in skipped]
    _atomic_write(out + ".log", "\n".join(lines) + "\n")


def export_logits(job: ExportJob) -> str:
    """One logit row per readable image, in model output order.

    Returns the output path. Deterministic in eval mode: files are visited
    in sorted order and inference runs under no_grad.
    """
    model = load_model(job.checkpoint, job.device)
    names = list_images(job.data_dir)
    if not names:
        raise ExportError(f"no images found under {job.data_dir}")
    rows: list[str] = []
    skipped: list[tuple[str, str]] = []
    n_classes = None
    with torch.no_grad():
        for start in range(0, len(names), job.batch_size):
            chunk = names[start : start + job.batch_size]
            batch, kept, miss = _load_batch(job.data_dir, chunk, job.image_size)
            skipped.extend(miss)
            if batch is None:
                continue
            logits = model(batch.to(job.device)).detach().cpu().numpy()
            if logits.ndim != 2 or logits.shape[1] < 2:
                raise ExportError("model must return (batch, C>=2) logits")
            n_classes = logits.shape[1]
            for name, row in zip(kept, logits):
                values = ",".join(_fmt(v) for v in row)
                rows.append(f"{name},{job.label},{values}")
    if n_classes is None:
        raise ExportError("every image failed to decode")
    header = ",".join(["sample_id", "label"] + [f"l_{i}" for i in range(n_classes)])
    _atomic_write(job.out, "\n".join([header] + rows) + "\n")
    _write_sidecar(job.out, skipped)
    return job.out


def _odin_scores_for_batch(
    model: torch.nn.Module, batch: torch.Tensor, temperature: float, epsilon: float
) -> np.ndarray:
    if epsilon > 0.0:
        x = batch.clone().requires_grad_(True)
        log_probs = torch.log_softmax(model(x) / temperature, dim=1)
        objective = log_probs.max(dim=1).values.sum()
        (grad,) = torch.autograd.grad(objective, x)
        batch = (batch + epsilon * grad.sign()).detach()
    with torch.no_grad():
        probs = torch.softmax(model(batch) / temperature, dim=1)
        return probs.max(dim=1).values.cpu().numpy()


def export_odin_scores(job: ExportJob, temperature: float = 1000.0, epsilon: float = 0.0014) -> str:
    """ODIN scores: temperature-scaled max softmax after an input step of
    ``epsilon`` along the sign of the gradient of the max log-softmax.

    epsilon = 0 reduces to plain temperature scaling (and at T = 1 to
    MSP). Emits a higher-is-IND score file; returns the output path.
    """
    if epsilon < 0.0:
        raise ExportError("epsilon must be non-negative")
    if temperature <= 0.0:
        raise ExportError("temperature must be positive")
    model = load_model(job.checkpoint, job.device)
    names = list_images(job.data_dir)
    if not names:
        raise ExportError(f"no images found under {job.data_dir}")
    rows: list[str] = []
    skipped: list[tuple[str, str]] = []
    for start in range(0, len(names), job.batch_size):
        chunk = names[start : start + job.batch_size]
        batch, kept, miss = _load_batch(job.data_dir, chunk, job.image_size)
        skipped.extend(miss)
        if batch is None:
            continue
        scores = _odin_scores_for_batch(model, batch.to(job.device), temperature, epsilon)
        for name, value in zip(kept, scores):
            rows.append(f"{name},{_fmt(value)},{job.label}")
    if not rows:
        raise ExportError("every image failed to decode")
    _atomic_write(job.out, "\n".join(["sample_id,score,label"] + rows) + "\n")
    _write_sidecar(job.out, skipped)
    return job.out
