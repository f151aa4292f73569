"""Command line front end: render --kind <k> --in <csv> --out <png>."""

import argparse
import sys

from .render import FigureKind, FigureSpec, SchemaError, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="render",
        description="Render a balance-experiment CSV as a PNG figure.")
    parser.add_argument("--kind", required=True,
                        choices=[k.value for k in FigureKind])
    parser.add_argument("--in", dest="csv_path", required=True,
                        help="input CSV (generations.csv / archive.csv / impact.csv)")
    parser.add_argument("--out", dest="out_path", required=True,
                        help="output PNG path")
    parser.add_argument("--baseline", type=float, default=None,
                        help="horizontal baseline for the fitness curve")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(kind=FigureKind(args.kind), csv_path=args.csv_path,
                      out_path=args.out_path, baseline=args.baseline)
    try:
        render(spec)
    except SchemaError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(f"wrote {args.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
