"""Figure construction from already-read file contents.

Nothing here computes statistics beyond the arithmetic the plots are
defined by: the returns chart draws the file's mean and interval columns
as-is, and the eviction chart averages the logged stakes within each
honesty class.  Values are carried next to their raw cell strings so the
dump mode can print exactly what the file said.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from plotkit.readers import InputError


@dataclass(frozen=True)
class CurveSpec:
    """Column names driving the returns chart."""

    x: str = "l_p"
    y: str = "mean_return"
    group: str = "l_v"
    error: str = "ci95"


@dataclass(frozen=True)
class Point:
    x: float
    y: float
    err: float
    raw: tuple  # (x, y, err) cell strings exactly as read


@dataclass(frozen=True)
class Curve:
    label: str  # raw group cell
    points: tuple


def _as_float(cell: str, column: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise InputError(f"column {column}: not a number: {cell!r}") from None


def _group_key(label: str):
    try:
        return (0, float(label))
    except ValueError:
        return (1, label)


def returns_series(columns: list, rows: list, spec: CurveSpec,
                   role: str = "proposer",
                   honesty: str = "honest") -> list:
    """Select and group rows for the returns chart.

    Rows are filtered to one (role, honesty) class, grouped by the group
    column, and sorted by the x column.  Rows whose y cell is empty carry
    no estimate and are skipped.
    """
    needed = [spec.x, spec.y, spec.group, spec.error, "role", "honesty"]
    for col in needed:
        if col not in columns:
            raise InputError(f"missing column: {col}")
    grouped: dict = {}
    for row in rows:
        if row["role"] != role or row["honesty"] != honesty:
            continue
        if row[spec.y] == "":
            continue
        raw = (row[spec.x], row[spec.y], row[spec.error])
        point = Point(
            x=_as_float(raw[0], spec.x),
            y=_as_float(raw[1], spec.y),
            err=_as_float(raw[2], spec.error) if raw[2] != "" else 0.0,
            raw=raw,
        )
        grouped.setdefault(row[spec.group], []).append(point)
    if not grouped:
        raise InputError(
            f"no data rows for role={role} honesty={honesty}")
    curves = []
    for label in sorted(grouped, key=_group_key):
        points = sorted(grouped[label], key=lambda p: p.x)
        curves.append(Curve(label=label, points=tuple(points)))
    return curves


def build_returns_figure(curves: list, spec: CurveSpec):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for curve in curves:
        xs = [p.x for p in curve.points]
        ys = [p.y for p in curve.points]
        errs = [p.err for p in curve.points]
        ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=3,
                    label=f"{spec.group}={curve.label}")
    ax.set_xlabel(spec.x)
    ax.set_ylabel(spec.y)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


@dataclass(frozen=True)
class EvictionSeries:
    rounds: tuple
    honest: tuple
    malicious: tuple  # empty when the log has no malicious nodes
    min_stake: int


def eviction_series(meta: dict, records: list) -> EvictionSeries:
    """Mean stake per honesty class at the end of each round.

    Records from all seeds are pooled, so the value at round r is the mean
    over every (seed, node) pair in that class.
    """
    classes = meta["node_classes"]
    by_class = {"honest": [], "malicious": []}
    for nid, cls in classes.items():
        if cls not in by_class:
            raise InputError(f"unknown node class {cls!r} for {nid}")
        by_class[cls].append(nid)
    per_round: dict = {}
    for i, rec in enumerate(records, start=2):
        stakes = rec["stakes"]
        sums = per_round.setdefault(rec["round"], [0, 0, 0])
        for cls_index, cls in enumerate(("honest", "malicious")):
            for nid in by_class[cls]:
                if nid not in stakes:
                    raise InputError(f"line {i}: no stake entry for {nid}")
                sums[cls_index] += stakes[nid]
        sums[2] += 1
    rounds = tuple(sorted(per_round))
    honest = []
    malicious = []
    for r in rounds:
        h, m, n = per_round[r]
        if by_class["honest"]:
            honest.append(h / (n * len(by_class["honest"])))
        if by_class["malicious"]:
            malicious.append(m / (n * len(by_class["malicious"])))
    return EvictionSeries(rounds=rounds, honest=tuple(honest),
                          malicious=tuple(malicious),
                          min_stake=meta["min_stake"])


def build_eviction_figure(series: EvictionSeries):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if series.honest:
        ax.plot(series.rounds, series.honest, label="honest")
    if series.malicious:
        ax.plot(series.rounds, series.malicious, label="malicious")
    ax.axhline(series.min_stake, linestyle="--", color="gray",
               label="min stake")
    ax.set_xlabel("round")
    ax.set_ylabel("mean stake")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def save_figure(fig, path: str) -> None:
    """Write a PNG with no environment-dependent metadata."""
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)
