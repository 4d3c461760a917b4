"""CSV emission and parsing for audit trails and aggregate summaries.

Both formats open with comment lines carrying a schema tag (and, for
audits, the FDR settings needed to replay the file). Floats print with
%.9g so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DataError
from .harness import RunResult, ScenarioConfig
from .metrics import ExperimentRecord

AUDIT_SCHEMA = "mabfdr.audit.v1"
AGGREGATE_SCHEMA = "mabfdr.aggregate.v1"

AUDIT_COLUMNS = ["run_id", "j", "truth", "alpha_j", "pvalue", "rejected",
                 "returned_arm", "samples", "truncated", "wealth_after"]
AGGREGATE_COLUMNS = ["method", "fdr_procedure", "scenario_id", "J", "runs",
                     "mfdr", "fdr_mean", "bdr", "mean_samples", "truncation",
                     "arms"]


def fmt(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.9g}"


def _truth(is_null: bool) -> str:
    return "null" if is_null else "nonnull"


def write_audit(path: str, config: ScenarioConfig,
                results: Sequence[RunResult]) -> None:
    w0 = config.w0 if config.w0 is not None else config.alpha / 2.0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema={AUDIT_SCHEMA}\n")
        fh.write(f"# fdr={config.fdr} alpha={fmt(config.alpha)} w0={fmt(w0)}\n")
        writer = csv.writer(fh)
        writer.writerow(AUDIT_COLUMNS)
        for res in results:
            for rec, wealth in zip(res.records, res.wealth):
                writer.writerow([
                    res.run, rec.j, _truth(rec.is_null), fmt(rec.alpha_j),
                    fmt(rec.pvalue), int(rec.rejected), rec.returned_arm,
                    rec.samples, int(rec.truncated), fmt(wealth)])


def write_aggregate(path: str, rows: Iterable[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema={AGGREGATE_SCHEMA}\n")
        writer = csv.writer(fh)
        writer.writerow(AGGREGATE_COLUMNS)
        for row in rows:
            writer.writerow([
                row["method"], row["fdr_procedure"], row["scenario_id"],
                row["J"], row["runs"], fmt(row["mfdr"]), fmt(row["fdr_mean"]),
                fmt(row["bdr"]), fmt(row["mean_samples"]),
                fmt(row["truncation"]), row["arms"]])


def _read_tagged(path: str, schema: str) -> tuple[list[str], list[dict[str, str]], list[str]]:
    """Rows of a schema-tagged CSV as string dicts, plus the comment lines."""
    comments: list[str] = []
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    with fh:
        lines = []
        for line in fh:
            if line.startswith("#"):
                comments.append(line.rstrip("\n"))
            else:
                lines.append(line)
    if not comments or f"schema={schema}" not in comments[0]:
        raise DataError(f"{path}: missing '# schema={schema}' comment line")
    reader = csv.reader(lines)
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
    return header, rows, comments


def _require(path: str, header: Sequence[str], needed: Sequence[str]) -> None:
    missing = [c for c in needed if c not in header]
    if missing:
        raise DataError(f"{path}: missing required column(s): {', '.join(missing)}")


@dataclass
class AuditFile:
    """Parsed audit CSV: FDR settings plus typed row tuples."""

    fdr: str
    alpha: float
    w0: float
    rows: list[dict]


def _audit_meta(path: str, comments: list[str]) -> tuple[str, float, float]:
    for line in comments:
        body = line.lstrip("#").strip()
        if body.startswith("fdr="):
            fields = dict(part.split("=", 1) for part in body.split())
            try:
                return fields["fdr"], float(fields["alpha"]), float(fields["w0"])
            except (KeyError, ValueError) as e:
                raise DataError(f"{path}: malformed fdr metadata comment") from e
    raise DataError(f"{path}: missing '# fdr=... alpha=... w0=...' comment line")


def read_audit(path: str) -> AuditFile:
    header, raw, comments = _read_tagged(path, AUDIT_SCHEMA)
    _require(path, header, AUDIT_COLUMNS)
    fdr, alpha, w0 = _audit_meta(path, comments)
    rows = []
    for r in raw:
        try:
            rows.append({
                "run_id": int(r["run_id"]),
                "j": int(r["j"]),
                "truth": r["truth"],
                "alpha_j": float(r["alpha_j"]),
                "pvalue": float(r["pvalue"]),
                "rejected": bool(int(r["rejected"])),
                "returned_arm": int(r["returned_arm"]),
                "samples": int(r["samples"]),
                "truncated": bool(int(r["truncated"])),
                "wealth_after": float(r["wealth_after"]),
            })
        except (KeyError, ValueError) as e:
            raise DataError(f"{path}: bad audit row {r}: {e}") from e
        if rows[-1]["truth"] not in ("null", "nonnull"):
            raise DataError(f"{path}: truth must be null or nonnull, got {rows[-1]['truth']!r}")
    return AuditFile(fdr=fdr, alpha=alpha, w0=w0, rows=rows)


def read_aggregate(path: str) -> list[dict]:
    header, raw, _ = _read_tagged(path, AGGREGATE_SCHEMA)
    _require(path, header, AGGREGATE_COLUMNS)
    rows = []
    for r in raw:
        try:
            rows.append({
                "method": r["method"],
                "fdr_procedure": r["fdr_procedure"],
                "scenario_id": r["scenario_id"],
                "J": int(r["J"]),
                "runs": int(r["runs"]),
                "mfdr": float(r["mfdr"]),
                "fdr_mean": float(r["fdr_mean"]),
                "bdr": float(r["bdr"]),
                "mean_samples": float(r["mean_samples"]),
                "truncation": float(r["truncation"]),
                "arms": int(r["arms"]),
            })
        except (KeyError, ValueError) as e:
            raise DataError(f"{path}: bad aggregate row {r}: {e}") from e
    return rows


def records_from_audit(audit: AuditFile) -> dict[int, list[ExperimentRecord]]:
    """Per-run record lists rebuilt from an audit file.

    Mean columns are not part of the audit schema, so the rebuilt records
    carry NaN means; metrics that need them cannot be recomputed here.
    """
    runs: dict[int, list[ExperimentRecord]] = {}
    for r in audit.rows:
        rec = ExperimentRecord(
            j=r["j"], is_null=r["truth"] == "null", alpha_j=r["alpha_j"],
            pvalue=r["pvalue"], rejected=r["rejected"],
            returned_arm=r["returned_arm"], returned_mean=math.nan,
            control_mean=math.nan, best_mean=math.nan,
            samples=r["samples"], truncated=r["truncated"])
        runs.setdefault(r["run_id"], []).append(rec)
    return runs
