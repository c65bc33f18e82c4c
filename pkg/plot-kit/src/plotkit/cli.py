"""Command line entry point.

Two subcommands, one per input format:

    plot-kit returns estimates.csv --group l_v --out fig2.png
    plot-kit eviction rounds.jsonl --out eviction.png

Both accept --dump to print the plotted values as text instead of (or in
addition to) writing an image.  The dump lines for the returns chart repeat
the CSV cells verbatim, so they can be checked against the source file.

Exit codes: 0 success, 2 input that violates the documented format,
3 filesystem problems.
"""

from __future__ import annotations

import argparse
import sys

from plotkit.figures import (
    CurveSpec,
    build_eviction_figure,
    build_returns_figure,
    eviction_series,
    returns_series,
    save_figure,
)
from plotkit.readers import InputError, read_rounds_jsonl, read_sweep_csv

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IO = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot-kit",
        description="Render simulator output files into figures.")
    sub = parser.add_subparsers(dest="command", required=True)

    ret = sub.add_parser("returns", help="line chart from an estimates CSV")
    ret.add_argument("csv", help="estimates CSV path")
    ret.add_argument("--x", default="l_p", help="x axis column")
    ret.add_argument("--y", default="mean_return", help="y axis column")
    ret.add_argument("--group", default="l_v",
                     help="one line per value of this column")
    ret.add_argument("--err", default="ci95", help="error bar column")
    ret.add_argument("--role", default="proposer",
                     help="role filter applied to the rows")
    ret.add_argument("--honesty", default="honest",
                     help="honesty filter applied to the rows")
    ret.add_argument("--out", help="output image path")
    ret.add_argument("--dump", action="store_true",
                     help="print the plotted cells as text")

    evi = sub.add_parser("eviction", help="stake trajectories from a round log")
    evi.add_argument("jsonl", help="round log path")
    evi.add_argument("--out", help="output image path")
    evi.add_argument("--dump", action="store_true",
                     help="print the plotted series as text")
    return parser


def cmd_returns(args) -> int:
    columns, rows = read_sweep_csv(args.csv)
    spec = CurveSpec(x=args.x, y=args.y, group=args.group, error=args.err)
    curves = returns_series(columns, rows, spec,
                            role=args.role, honesty=args.honesty)
    if args.dump:
        print(f"columns: {spec.group},{spec.x},{spec.y},{spec.error}")
        for curve in curves:
            for p in curve.points:
                print(f"{spec.group}={curve.label} {spec.x}={p.raw[0]} "
                      f"{spec.y}={p.raw[1]} {spec.error}={p.raw[2]}")
    if args.out:
        save_figure(build_returns_figure(curves, spec), args.out)
    return EXIT_OK


def cmd_eviction(args) -> int:
    meta, records = read_rounds_jsonl(args.jsonl)
    series = eviction_series(meta, records)
    if args.dump:
        print(f"min_stake={series.min_stake}")
        for i, r in enumerate(series.rounds):
            parts = [f"round={r}"]
            if series.honest:
                parts.append(f"honest={series.honest[i]!r}")
            if series.malicious:
                parts.append(f"malicious={series.malicious[i]!r}")
            print(" ".join(parts))
    if args.out:
        save_figure(build_eviction_figure(series), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.out and not args.dump:
        print("error: nothing to do, pass --out and/or --dump",
              file=sys.stderr)
        return EXIT_INPUT
    try:
        if args.command == "returns":
            return cmd_returns(args)
        return cmd_eviction(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
