"""Command-line entry point: score a pre-tokenized corpus with a neural
model and write the exchange TSV."""

from __future__ import annotations

import argparse
import sys

from .export import ExportJob, export


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="surprisal-export",
        description="Per-word surprisal (nats) from a pretrained language model",
    )
    parser.add_argument("--corpus", required=True, help="pre-tokenized corpus TSV")
    parser.add_argument("--model", required=True, help="model identifier or local path")
    parser.add_argument(
        "--mode",
        choices=("autoregressive", "cloze"),
        default="autoregressive",
        help="cloze emits pseudo-surprisals and tags the file pseudo=1",
    )
    parser.add_argument("--output", required=True, help="exchange TSV to write")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--batch-size", type=int, default=8)
    args = parser.parse_args(argv)
    job = ExportJob(
        corpus_path=args.corpus,
        model_id=args.model,
        mode=args.mode,
        output_path=args.output,
        device=args.device,
        batch_size=args.batch_size,
    )
    try:
        path = export(job)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"export: wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
