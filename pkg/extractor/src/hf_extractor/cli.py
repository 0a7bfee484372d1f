"""Command-line entry point: extract per-layer hidden states to a
representation bundle.

    extract --model <id-or-dir> --data <csv> --out <bundle dir> [--layers auto]
"""

from __future__ import annotations

import argparse
import sys

from .extraction import ExtractionJob, extract


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="extract",
        description="extract per-layer transformer hidden states")
    parser.add_argument("--model", required=True,
                        help="model identifier or local model directory")
    parser.add_argument("--data", required=True,
                        help="CSV with columns id,kind,task,sheet,"
                             "stimulus_id,score,augmented,text")
    parser.add_argument("--out", required=True, help="output bundle directory")
    parser.add_argument("--layers", default="auto",
                        help='"auto" or comma-separated layer numbers')
    args = parser.parse_args(argv)

    layers = args.layers if args.layers == "auto" \
        else [int(x) for x in args.layers.split(",")]
    try:
        root = extract(ExtractionJob(model_id=args.model,
                                     data_path=args.data,
                                     out_path=args.out, layers=layers))
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"ok: bundle written to {root}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
