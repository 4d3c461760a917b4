"""Command line front end: one figure per invocation."""

from __future__ import annotations

import argparse
import sys

from .errors import ConfigError, DataError
from .figures import KINDS, MFDR_VS_PI1, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mabfdr-plots",
        description="Render figures from mabfdr audit and aggregate CSVs.",
    )
    parser.add_argument("--kind", required=True, choices=KINDS,
                        help="which figure to draw")
    parser.add_argument("--in", dest="inputs", required=True, nargs="+",
                        metavar="CSV", help="input CSV file(s)")
    parser.add_argument("--out", required=True,
                        help="output image path (.png or .svg)")
    parser.add_argument("--alpha", type=float, default=0.1,
                        help=f"reference level drawn on the {MFDR_VS_PI1} panel"
                             " (default 0.1)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        render(args.kind, args.inputs, args.out, alpha=args.alpha)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
