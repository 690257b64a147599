"""Command-line surface: export-logits and export-odin."""

from __future__ import annotations

import argparse
import sys

from .export import ExportError, ExportJob, export_logits, export_odin_scores


def _add_job_args(p: argparse.ArgumentParser):
    p.add_argument("--checkpoint", required=True, help="TorchScript or pickled nn.Module")
    p.add_argument("--data-dir", required=True, help="image folder (walked recursively)")
    p.add_argument("--label", choices=("ind", "ood", "unknown"), default="unknown")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--device", default="cpu")
    p.add_argument("--image-size", type=int, default=32)
    p.add_argument("--out", required=True)


def _job(args) -> ExportJob:
    return ExportJob(
        checkpoint=args.checkpoint,
        data_dir=args.data_dir,
        label=args.label,
        batch_size=args.batch_size,
        device=args.device,
        image_size=args.image_size,
        out=args.out,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oodexport",
        description="Emit logit/score files from a torch classifier for OOD evaluation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("export-logits", help="one logit row per image")
    _add_job_args(p)

    p = sub.add_parser("export-odin", help="ODIN scores (temperature + input perturbation)")
    _add_job_args(p)
    p.add_argument("--temperature", type=float, default=1000.0)
    p.add_argument("--epsilon", type=float, default=0.0014)

    args = parser.parse_args(argv)
    try:
        if args.command == "export-logits":
            out = export_logits(_job(args))
        else:
            out = export_odin_scores(_job(args), args.temperature, args.epsilon)
    except ExportError as exc:
        print(f"error E_EXPORT: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
