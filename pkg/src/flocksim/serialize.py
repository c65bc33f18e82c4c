"""Stable on-disk formats: round logs, ledger events, estimate tables.

All writers are deterministic functions of their inputs: keys are sorted,
floats use shortest-repr formatting, and no timestamps or environment
details leak into the output.  Every file starts with a schema
declaration; readers should reject mismatching versions.
"""

from __future__ import annotations

import json
import math

from .engine import RoundRecord
from .harness import CSV_HEADER, SimResult

SCHEMA_ROUNDS = "flocksim-rounds/1"
SCHEMA_EVENTS = "flocksim-ledger-events/1"
SCHEMA_SWEEP = "flocksim-sweep/1"


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def record_to_obj(record: RoundRecord, seed_index: int) -> dict:
    return {
        "seed": seed_index,
        "round": record.round,
        "status": record.status,
        "proposers": list(record.proposers),
        "voters": list(record.voters),
        "submissions": {pid: (pv.to_list() if pv is not None else None)
                        for pid, pv in record.submissions.items()},
        "published": (record.published.to_list()
                      if record.published is not None else None),
        "valid": record.valid,
        "votes": [{"voter_id": v.voter_id, "score": v.score}
                  for v in record.votes],
        "tally": ({"approvals": record.tally.approvals,
                   "aggregate_score": record.tally.aggregate_score,
                   "accepted": record.tally.accepted}
                  if record.tally is not None else None),
        "deltas": dict(record.deltas),
        "resulting": record.resulting.to_list(),
        "stakes": dict(record.stakes),
    }


def rounds_meta(result: SimResult) -> dict:
    if not result.runs:
        raise ValueError("round logs need a result built with keep_runs=True")
    pop = result.runs[0].population
    asg = pop.assignment
    return {
        "schema": SCHEMA_ROUNDS,
        "n_seeds": result.config.n_seeds,
        "rounds": result.config.rounds,
        "min_stake": result.config.protocol.min_stake,
        "initial_stake": result.config.initial_stake,
        "node_classes": {nid: asg.node_class(nid) for nid in pop.node_ids},
        "run_seeds": [run.run_seed for run in result.runs],
    }


def rounds_jsonl_lines(result: SimResult) -> list:
    lines = [_dumps(rounds_meta(result))]
    for run in result.runs:
        for record in run.records:
            lines.append(_dumps(record_to_obj(record, run.seed_index)))
    return lines


def write_rounds_jsonl(path: str, result: SimResult) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in rounds_jsonl_lines(result):
            fh.write(line + "\n")


def ledger_events_lines(result: SimResult) -> list:
    lines = [_dumps({"schema": SCHEMA_EVENTS,
                     "n_seeds": result.config.n_seeds})]
    for run in result.runs:
        for ev in run.ledger.events:
            obj = ev.to_json_obj()
            obj["seed"] = run.seed_index
            lines.append(_dumps(obj))
    return lines


def write_ledger_events(path: str, result: SimResult) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in ledger_events_lines(result):
            fh.write(line + "\n")


def _csv_cell(value) -> str:
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def estimates_csv_lines(rows: list) -> list:
    lines = [f"# {SCHEMA_SWEEP}", CSV_HEADER]
    columns = CSV_HEADER.split(",")
    for row in rows:
        lines.append(",".join(_csv_cell(row[c]) for c in columns))
    return lines


def write_estimates_csv(path: str, rows: list) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in estimates_csv_lines(rows):
            fh.write(line + "\n")


def read_estimates_csv(path: str) -> list:
    """Parse an estimates CSV back into row dicts (round-trip checks)."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if not body:
        return rows
    columns = body[0].split(",")
    for ln in body[1:]:
        cells = ln.split(",")
        row = {}
        for col, cell in zip(columns, cells):
            if col in ("T", "N", "N_p", "N_v", "samples"):
                row[col] = int(cell)
            elif col in ("role", "honesty"):
                row[col] = cell
            else:
                row[col] = math.nan if cell == "" else float(cell)
        rows.append(row)
    return rows
