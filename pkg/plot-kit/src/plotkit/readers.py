"""Readers for the simulator's two documented output formats."""

from __future__ import annotations

import json

SWEEP_SCHEMA = "flocksim-sweep/1"
ROUNDS_SCHEMA = "flocksim-rounds/1"


class InputError(ValueError):
    """A file does not match the documented format."""


def read_sweep_csv(path: str) -> tuple[list[str], list[dict]]:
    """Read an estimates CSV into (columns, rows of raw cell strings).

    Lines starting with '#' are comments; the first one carries the schema
    tag and is checked when present.  Cells are kept as the exact strings
    from the file so callers can compare output against the source.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            tag = line[1:].strip()
            if tag.startswith("flocksim-sweep/") and tag != SWEEP_SCHEMA:
                raise InputError(f"unsupported schema: {tag}")
            continue
        if line:
            body.append(line)
    if not body:
        raise InputError("no header row")
    columns = body[0].split(",")
    rows = []
    for i, line in enumerate(body[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(columns):
            raise InputError(
                f"row {i} has {len(cells)} cells, header has {len(columns)}")
        rows.append(dict(zip(columns, cells)))
    return columns, rows


def read_rounds_jsonl(path: str) -> tuple[dict, list[dict]]:
    """Read a round log into (meta, records).

    The first line is the meta object; every following line is one round
    record.  A line that fails to parse is reported by its line number.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise InputError("empty file")
    objs = []
    for i, line in enumerate(lines, start=1):
        try:
            objs.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise InputError(f"line {i}: invalid JSON ({exc.msg})") from exc
        if not isinstance(objs[-1], dict):
            raise InputError(f"line {i}: expected an object")
    meta = objs[0]
    if meta.get("schema") != ROUNDS_SCHEMA:
        raise InputError(f"unsupported schema: {meta.get('schema')!r}")
    for field in ("node_classes", "min_stake"):
        if field not in meta:
            raise InputError(f"meta line missing field {field!r}")
    records = objs[1:]
    if not records:
        raise InputError("round log has zero rounds")
    for i, rec in enumerate(records, start=2):
        for field in ("round", "seed", "stakes"):
            if field not in rec:
                raise InputError(f"line {i}: record missing field {field!r}")
    return meta, records
