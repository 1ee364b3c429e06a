"""Command-line entry: figures --input <run dir> --kinds overlay,ci_band,corner."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_KINDS, FigureJob, SchemaError, render


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render figures from a fracbayes run directory's CSV files",
    )
    parser.add_argument("--input", required=True, help="run directory with the CSV artifacts")
    parser.add_argument(
        "--kinds",
        default=",".join(FIGURE_KINDS),
        type=lambda s: tuple(k.strip() for k in s.split(",") if k.strip()),
        help="comma-separated subset of overlay,ci_band,corner",
    )
    parser.add_argument("--format", default="png", help="output extension (png, pdf, svg)")
    parser.add_argument("--out", help="output directory (defaults to the input directory)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        job = FigureJob(
            input_dir=args.input,
            figure_kinds=args.kinds,
            out_format=args.format,
            output_dir=args.out,
        )
        for path in render(job):
            print(path)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
