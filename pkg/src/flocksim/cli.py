"""Command-line front door.

Subcommands:
  run      one simulation; writes rounds.jsonl, ledger_events.jsonl,
           estimates.csv, summary.txt into --out DIR
  sweep    grid sweep from --grid PATH; writes the estimates CSV to --out
  figure2  returns-vs-l_p sweep (l_p in {0.0 .. 0.4}); writes CSV to --out

Exit codes: 0 success, 2 config error, 3 IO error, 4 simulation abort
(every round of every seed aborted; outputs are still written).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from collections import Counter

from .config import (ConfigError, config_to_obj, default_config,
                     load_config_file, load_grid_file)
from .engine import STATUS_COMPLETED
from .harness import (SimResult, SweepPoint, eviction_curve, figure2_sweep,
                      run_simulation, sweep, sweep_rows)
from .serialize import (write_estimates_csv, write_ledger_events,
                        write_rounds_jsonl)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_ABORT = 4


def _load_config(args):
    if args.config is not None:
        config = load_config_file(args.config)
    else:
        config = default_config()
    if args.seed is not None:
        if not (0 <= args.seed < (1 << 64)):
            raise ConfigError("run.seed_base", "seed must fit in 64 bits")
        config = dataclasses.replace(config, seed_base=args.seed)
    return config


def _summary_text(result: SimResult) -> str:
    config = result.config
    lines = []
    lines.append("simulation summary")
    lines.append("config: " + json.dumps(config_to_obj(config),
                                         sort_keys=True))
    statuses = Counter(rec.status for run in result.runs
                       for rec in run.records)
    lines.append("round statuses: " + ", ".join(
        f"{k}={v}" for k, v in sorted(statuses.items())))
    lines.append("estimates (mean stake-normalized delta per selected round):")
    for (role, honesty), est in sorted(result.estimates.items()):
        if est.has_data:
            lines.append(
                f"  {role:8s} {honesty:9s} mean={est.mean_return:+.6f} "
                f"se={est.std_err:.6f} ci95={est.ci95:.6f} "
                f"samples={est.samples}")
        else:
            lines.append(f"  {role:8s} {honesty:9s} no data (never selected)")
    report = eviction_curve(result.runs, config.protocol.min_stake)
    lines.append(f"final mean stake honest: {report.honest_mean[-1]:.2f}")
    if report.malicious_mean is not None:
        lines.append(
            f"final mean stake malicious: {report.malicious_mean[-1]:.2f}")
        if report.first_round_mean_below is not None:
            lines.append("first round mean malicious stake < min_stake: "
                         f"{report.first_round_mean_below}")
        else:
            lines.append("mean malicious stake never fell below min_stake")
        firsts = [f for f in report.per_seed_first_eviction if f is not None]
        if firsts:
            lines.append(
                "first individual eviction round per seed (where reached): "
                + ", ".join(str(f) for f in firsts))
    conserved = all(run.ledger.conservation_check() for run in result.runs)
    lines.append(f"token conservation: {'ok' if conserved else 'VIOLATED'}")
    lines.append("final oracle MSE per seed: " + ", ".join(
        f"{run.oracle_mse:.6f}" for run in result.runs))
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    config = _load_config(args)
    result = run_simulation(config)
    out_dir = args.out
    import os
    os.makedirs(out_dir, exist_ok=True)
    write_rounds_jsonl(os.path.join(out_dir, "rounds.jsonl"), result)
    write_ledger_events(os.path.join(out_dir, "ledger_events.jsonl"), result)
    rows = sweep_rows([SweepPoint({}, result)])
    write_estimates_csv(os.path.join(out_dir, "estimates.csv"), rows)
    summary = _summary_text(result)
    with open(os.path.join(out_dir, "summary.txt"), "w",
              encoding="utf-8", newline="\n") as fh:
        fh.write(summary)
    if not args.quiet:
        sys.stdout.write(summary)
    if result.all_rounds_aborted:
        sys.stderr.write("error: every round aborted\n")
        return EXIT_ABORT
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load_config(args)
    grid = load_grid_file(args.grid)
    points = sweep(config, grid, keep_runs=False)
    write_estimates_csv(args.out, sweep_rows(points))
    if not args.quiet:
        print(f"wrote {args.out} ({len(points)} grid points)")
    if all(p.result.all_rounds_aborted for p in points):
        sys.stderr.write("error: every round aborted\n")
        return EXIT_ABORT
    return EXIT_OK


def cmd_figure2(args) -> int:
    config = _load_config(args)
    points = figure2_sweep(config, args.lv, keep_runs=False)
    write_estimates_csv(args.out, sweep_rows(points))
    if not args.quiet:
        print(f"wrote {args.out} ({len(points)} grid points)")
    if all(p.result.all_rounds_aborted for p in points):
        sys.stderr.write("error: every round aborted\n")
        return EXIT_ABORT
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flocksim",
        description="Deterministic simulator for a stake-based federated "
                    "learning protocol with committee voting.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", metavar="PATH", default=None,
                       help="JSON config file (defaults built in)")
        p.add_argument("--seed", type=int, default=None, metavar="U64",
                       help="override the base seed")
        p.add_argument("--quiet", action="store_true",
                       help="suppress progress and summary output")

    p_run = sub.add_parser("run", help="run one simulation")
    common(p_run)
    p_run.add_argument("--out", metavar="DIR", required=True,
                       help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid sweep")
    common(p_sweep)
    p_sweep.add_argument("--grid", metavar="PATH", required=True,
                         help="JSON grid file: axis name -> list of values")
    p_sweep.add_argument("--out", metavar="CSV", required=True,
                         help="output CSV path")
    p_sweep.set_defaults(func=cmd_sweep)

    p_fig2 = sub.add_parser("figure2",
                            help="sweep l_p over {0.0,0.1,0.2,0.3,0.4}")
    common(p_fig2)
    p_fig2.add_argument("--out", metavar="CSV", required=True,
                        help="output CSV path")
    p_fig2.add_argument("--lv", type=float, nargs="+", default=None,
                        metavar="L_V", help="optional l_v values, one "
                        "curve per value")
    p_fig2.set_defaults(func=cmd_figure2)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
