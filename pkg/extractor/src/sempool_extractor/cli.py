"""Command-line entry points for the extractor.

    sempool-extract text   --manifest prompts.jsonl --out labels.emb --model hash-64
    sempool-extract images --dir images/ --out images.emb --model ViT-B-16/openai

Exit codes: 0 success, 2 bad input or unavailable model.
"""

from __future__ import annotations

import argparse
import sys

from .errors import ExtractorError
from .jobs import ExtractionJob, extract_images, extract_text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sempool-extract", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    text = sub.add_parser("text", help="encode a prompt manifest (one row per prompt)")
    text.add_argument("--manifest", required=True)
    text.add_argument("--out", required=True)
    text.add_argument("--model", default="hash-64")
    text.add_argument("--batch-size", type=int, default=64)
    text.add_argument("--device", default="cpu")

    images = sub.add_parser("images", help="encode an image directory (one row per file)")
    images.add_argument("--dir", required=True)
    images.add_argument("--out", required=True)
    images.add_argument("--model", default="hash-64")
    images.add_argument("--batch-size", type=int, default=64)
    images.add_argument("--device", default="cpu")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "text":
            job = ExtractionJob(args.model, args.manifest, args.out, args.batch_size, args.device)
            rows = extract_text(job)
        else:
            job = ExtractionJob(args.model, args.dir, args.out, args.batch_size, args.device)
            rows = extract_images(job)
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {rows} embedding rows to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
