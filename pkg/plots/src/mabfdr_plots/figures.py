"""The four figure kinds over audit and aggregate CSVs.

Series extraction is split from drawing so the plotted points can be
checked without rendering: each *_series function is pure and returns
plain float lists keyed by the grouping column.
"""

from __future__ import annotations

import numpy as np
from matplotlib.figure import Figure

from .csvdata import (
    AGGREGATE_SCHEMA,
    AUDIT_SCHEMA,
    Table,
    audit_alpha,
    parse_pi1,
    read_table,
    require_columns,
)
from .errors import ConfigError, DataError

POWER_VS_TRUNCATION = "power-vs-truncation"
SAMPLES_VS_ARMS = "samples-vs-arms"
FDP_TRAJECTORIES = "fdp-trajectories"
MFDR_VS_PI1 = "mfdr-vs-pi1"
KINDS = (POWER_VS_TRUNCATION, SAMPLES_VS_ARMS, FDP_TRAJECTORIES, MFDR_VS_PI1)

# grouping column and (x, y) columns per aggregate-driven kind
_AGGREGATE_KINDS = {
    POWER_VS_TRUNCATION: ("method", "truncation", "bdr"),
    SAMPLES_VS_ARMS: ("method", "arms", "mean_samples"),
    MFDR_VS_PI1: ("fdr_procedure", "scenario_id", "mfdr"),
}


def _read_all(paths: list[str], schema: str) -> list[tuple[str, Table]]:
    tables = [(p, read_table(p, schema)) for p in paths]
    if not any(t.rows for _, t in tables):
        raise DataError(f"no data rows in {', '.join(paths)}")
    return tables


def aggregate_series(kind: str, paths: list[str]) -> dict[str, tuple[list[float], list[float]]]:
    """Per-series sorted (x, y) point lists for an aggregate-driven kind."""
    group_col, x_col, y_col = _AGGREGATE_KINDS[kind]
    points: dict[str, list[tuple[float, float]]] = {}
    for path, table in _read_all(paths, AGGREGATE_SCHEMA):
        require_columns(path, table, [group_col, x_col, y_col])
        for row in table.rows:
            try:
                x = parse_pi1(row[x_col]) if x_col == "scenario_id" else float(row[x_col])
                y = float(row[y_col])
            except ValueError as e:
                raise DataError(f"{path}: bad value in row {row}: {e}") from e
            points.setdefault(row[group_col], []).append((x, y))
    series = {}
    for name, pts in sorted(points.items()):
        pts.sort()
        series[name] = ([x for x, _ in pts], [y for _, y in pts])
    return series


def fdp_paths(path: str) -> tuple[list[int], dict[int, list[float]], list[float], float]:
    """Per-run FDP trajectories over the hypothesis index, plus their mean.

    Returns (hypothesis indices, per-run paths, mean path, alpha). FDP at
    index j counts rejected nulls over rejections among hypotheses <= j.
    """
    (path, table), = _read_all([path], AUDIT_SCHEMA)
    require_columns(path, table, ["run_id", "j", "truth", "rejected"])
    alpha = audit_alpha(path, table)
    per_run: dict[int, dict[int, float]] = {}
    counts: dict[int, tuple[int, int]] = {}
    for row in table.rows:
        try:
            run, j = int(row["run_id"]), int(row["j"])
            rejected = bool(int(row["rejected"]))
            is_null = row["truth"] == "null"
        except ValueError as e:
            raise DataError(f"{path}: bad value in row {row}: {e}") from e
        false, total = counts.get(run, (0, 0))
        if rejected:
            total += 1
            false += is_null
        counts[run] = (false, total)
        per_run.setdefault(run, {})[j] = false / max(1, total)
    js = sorted({j for path_ in per_run.values() for j in path_})
    paths_out: dict[int, list[float]] = {}
    for run, by_j in sorted(per_run.items()):
        level, points = 0.0, []
        for j in js:
            level = by_j.get(j, level)  # FDP is a step process; carry forward
            points.append(level)
        paths_out[run] = points
    mean = [float(np.mean([paths_out[r][i] for r in paths_out])) for i in range(len(js))]
    return js, paths_out, mean, alpha


def _draw_aggregate(kind: str, series, alpha: float | None) -> Figure:
    labels = {
        POWER_VS_TRUNCATION: ("truncation M", "BDR"),
        SAMPLES_VS_ARMS: ("arms", "mean samples per run"),
        MFDR_VS_PI1: ("non-null proportion pi1", "mFDR"),
    }
    fig = Figure(figsize=(6.4, 4.4))
    ax = fig.add_subplot()
    for name, (xs, ys) in series.items():
        ax.plot(xs, ys, marker="o", label=name)
    if kind == MFDR_VS_PI1 and alpha is not None:
        ax.axhline(alpha, color="gray", linestyle="--", linewidth=1,
                   label=f"alpha={alpha:g}")
    xlabel, ylabel = labels[kind]
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig


def _draw_fdp(js, paths, mean, alpha: float) -> Figure:
    fig = Figure(figsize=(6.4, 4.4))
    ax = fig.add_subplot()
    for points in paths.values():
        ax.plot(js, points, color="tab:blue", alpha=0.25, linewidth=0.8)
    ax.plot(js, mean, color="tab:red", linewidth=2, label="mean FDP")
    ax.axhline(alpha, color="gray", linestyle="--", linewidth=1,
               label=f"alpha={alpha:g}")
    ax.set_xlabel("hypothesis index j")
    ax.set_ylabel("FDP")
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig


def render(kind: str, paths: list[str], out: str, alpha: float = 0.1) -> None:
    """Write one image for the requested figure kind.

    alpha draws the reference line on the mFDR panel; the FDP panel takes
    its level from the audit file's own metadata instead.
    """
    if kind not in KINDS:
        raise ConfigError(f"unknown figure kind {kind!r}; choose from {', '.join(KINDS)}")
    if kind == FDP_TRAJECTORIES:
        if len(paths) != 1:
            raise ConfigError("fdp-trajectories takes exactly one audit CSV")
        fig = _draw_fdp(*fdp_paths(paths[0]))
    else:
        fig = _draw_aggregate(kind, aggregate_series(kind, paths), alpha)
    fig.savefig(out)
