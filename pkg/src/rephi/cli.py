"""Command-line interface.

Subcommands: ``analyze`` (run the pipeline), ``report`` (emit plot-data
records from saved rows), ``validate`` (check a bundle and optional span
annotations), ``golden`` (regenerate oracle fixtures, gated behind
``--regenerate``).

Exit codes: 0 success; 2 validation failure; 3 partial success (some
rows invalid); 4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bundle import load_bundle, load_span_annotations
from .errors import BundleLoadError, BundleValidationError, RephiError
from .pipeline import PipelineConfig, emit_report, run_and_write
from .results import read_result_rows

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARTIAL = 3
EXIT_IO = 4


def _cmd_analyze(args) -> int:
    try:
        if args.config:
            config = PipelineConfig.from_file(
                args.config, bundle_path=args.bundle,
                spans_path=args.spans, out_dir=args.out)
        else:
            config = PipelineConfig(bundle_path=args.bundle,
                                    spans_path=args.spans, out_dir=args.out)
    except (OSError, ValueError, TypeError) as e:
        print(f"invalid configuration: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        rows, base = run_and_write(config)
    except (BundleLoadError, BundleValidationError) as e:
        print(f"validation failure: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"I/O failure: {e}", file=sys.stderr)
        return EXIT_IO
    n_invalid = sum(not r.valid for r in rows)
    print(f"wrote {len(rows)} rows ({n_invalid} invalid) to {base}.csv/.jsonl")
    return EXIT_PARTIAL if n_invalid else EXIT_OK


def _cmd_report(args) -> int:
    try:
        rows = read_result_rows(args.rows)
        target = emit_report(rows, args.kind, args.out)
    except (BundleValidationError, ValueError) as e:
        print(f"validation failure: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"I/O failure: {e}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {target}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        bundle = load_bundle(args.bundle)
        if args.spans:
            load_span_annotations(args.spans, bundle)
    except (BundleLoadError, BundleValidationError) as e:
        print(f"invalid: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"I/O failure: {e}", file=sys.stderr)
        return EXIT_IO
    print(f"ok: {len(bundle.items)} items, D={bundle.embedding_dim}, "
          f"layers={bundle.layer_indices}")
    return EXIT_OK


def _cmd_golden(args) -> int:
    script = (Path(__file__).resolve().parents[3]
              / "tests" / "oracles" / "generate_fixtures.py")
    if not args.regenerate:
        print("golden fixtures are pinned; pass --regenerate to rebuild "
              "them from the brute-force oracles (slow)")
        return EXIT_OK
    if not script.is_file():
        print(f"oracle generator not available at {script} "
              "(requires a source checkout)", file=sys.stderr)
        return EXIT_IO
    import runpy
    sys.path.insert(0, str(script.parents[1]))
    runpy.run_path(str(script), run_name="__main__")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rephi",
        description="Integrated-information analysis of transformer "
                    "token representations")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run the full pipeline")
    p.add_argument("--bundle", required=True)
    p.add_argument("--spans")
    p.add_argument("--config")
    p.add_argument("--out", default="out")
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("report", help="emit plot-data records")
    p.add_argument("--rows", required=True,
                   help="path to results (without suffix)")
    p.add_argument("--kind", required=True,
                   choices=["phi_distributions", "criterion1",
                            "criterion2", "criterion3"])
    p.add_argument("--out", default="out")
    p.set_defaults(fn=_cmd_report)

    p = sub.add_parser("validate", help="validate a bundle directory")
    p.add_argument("--bundle", required=True)
    p.add_argument("--spans")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("golden", help="regenerate oracle fixtures")
    p.add_argument("--regenerate", action="store_true")
    p.set_defaults(fn=_cmd_golden)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
