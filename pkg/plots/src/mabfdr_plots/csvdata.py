"""Readers for the simulator's published CSV schemas.

The schemas are re-declared here on purpose: this package consumes the
documented file formats only, never the simulator's internals. Each file
carries a '# schema=<tag>' first comment; audit files add a
'# fdr=<kind> alpha=<a> w0=<w>' metadata comment.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

from .errors import DataError

AUDIT_SCHEMA = "mabfdr.audit.v1"
AGGREGATE_SCHEMA = "mabfdr.aggregate.v1"


@dataclass
class Table:
    """One parsed CSV: header, string-valued rows, and comment lines."""

    columns: list[str]
    rows: list[dict[str, str]]
    comments: list[str]


def read_table(path: str, schema: str) -> Table:
    comments: list[str] = []
    data_lines: list[str] = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    with fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line.rstrip("\n"))
            else:
                data_lines.append(line)
    if not comments or f"schema={schema}" not in comments[0]:
        raise DataError(f"{path}: missing '# schema={schema}' comment line")
    reader = csv.reader(data_lines)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{path}: no header row") from None
    rows = []
    for row in reader:
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{path}: row width {len(row)} != header width {len(header)}")
        rows.append(dict(zip(header, row)))
    return Table(header, rows, comments)


def require_columns(path: str, table: Table, needed: list[str]) -> None:
    missing = [c for c in needed if c not in table.columns]
    if missing:
        raise DataError(f"{path}: missing required column(s): {', '.join(missing)}")


def audit_alpha(path: str, table: Table) -> float:
    """The test level recorded in an audit file's metadata comment."""
    for line in table.comments:
        body = line.lstrip("#").strip()
        if body.startswith("fdr="):
            fields = dict(part.split("=", 1) for part in body.split())
            try:
                return float(fields["alpha"])
            except (KeyError, ValueError) as e:
                raise DataError(f"{path}: malformed fdr metadata comment") from e
    raise DataError(f"{path}: no '# fdr=... alpha=...' metadata comment")


def parse_pi1(scenario_id: str) -> float:
    """Non-null proportion out of a 'family|pi1=<x>' scenario id."""
    marker = "pi1="
    if marker not in scenario_id:
        raise DataError(f"scenario_id {scenario_id!r} carries no pi1 value")
    try:
        return float(scenario_id.split(marker, 1)[1])
    except ValueError as e:
        raise DataError(f"scenario_id {scenario_id!r}: bad pi1 value") from e
