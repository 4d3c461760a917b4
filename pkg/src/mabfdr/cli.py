"""Command-line front end: simulate, sweep, replay.

Exit codes: 0 success, 2 configuration error, 3 data error. The seed may
come from --seed, a config file, or the MABFDR_SEED environment variable,
in that order of precedence. Identical invocations write byte-identical
CSVs.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import replace

from . import online_fdr
from .csvio import read_audit, write_aggregate, write_audit
from .errors import ConfigError, DataError
from .harness import (FAMILIES, FAMILY_DEFAULTS, GAUSSIAN_FAMILY, METHODS,
                      ScenarioConfig, aggregate_row, run_many)

log = logging.getLogger(__name__)

# flag/config-file key -> ScenarioConfig field
_FIELDS = {
    "family": ("family", str),
    "hyps": ("hypotheses", int),
    "null_fraction": ("null_fraction", float),
    "arms": ("arms", int),
    "best_mean": ("best_mean", float),
    "gap": ("gap", float),
    "epsilon": ("epsilon", float),
    "truncation": ("truncation", None),
    "runs": ("runs", int),
    "seed": ("seed", int),
    "fdr": ("fdr", str),
    "method": ("method", str),
    "alpha": ("alpha", float),
    "w0": ("w0", float),
    "data": ("data_path", str),
    "top_n": ("top_n", int),
}


def _truncation(text: str) -> float:
    if text.strip().lower() in ("inf", "none"):
        return math.inf
    try:
        value = int(text)
    except ValueError:
        raise ConfigError(f"truncation must be an integer or 'inf', got {text!r}") from None
    return float(value)


def _read_config_file(path: str) -> dict[str, str]:
    """key=value lines; '#' starts a comment; keys may use - or _."""
    values: dict[str, str] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    with fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path} line {lineno}: expected key=value")
            key, value = body.split("=", 1)
            key = key.strip().replace("-", "_")
            if key not in _FIELDS:
                raise ConfigError(f"{path} line {lineno}: unknown key {key!r}")
            values[key] = value.strip()
    return values


def _coerce(key: str, raw: str):
    field, cast = _FIELDS[key]
    if key == "truncation":
        return _truncation(raw)
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def build_config(args: argparse.Namespace) -> ScenarioConfig:
    """Merge defaults, config file, environment seed, and flags."""
    family = args.family
    if family is None and args.config:
        family = _read_config_file(args.config).get("family")
    if family is None:
        family = GAUSSIAN_FAMILY
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}")
    best, gap = FAMILY_DEFAULTS.get(family, FAMILY_DEFAULTS[GAUSSIAN_FAMILY])
    values = {"family": family, "best_mean": best, "gap": gap}

    env_seed = os.environ.get("MABFDR_SEED")
    if env_seed is not None:
        values["seed"] = _coerce("seed", env_seed)
    if args.config:
        for key, raw in _read_config_file(args.config).items():
            values[_FIELDS[key][0]] = _coerce(key, raw)
    for key in _FIELDS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[_FIELDS[key][0]] = flag

    config = replace(ScenarioConfig(), **values)
    config.validate()
    return config


def _scenario_flags(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("scenario")
    g.add_argument("--family", choices=FAMILIES)
    g.add_argument("--hyps", type=int, help="number of hypotheses")
    g.add_argument("--null-fraction", dest="null_fraction", type=float)
    g.add_argument("--arms", type=int, help="arm count including the control")
    g.add_argument("--best-mean", dest="best_mean", type=float)
    g.add_argument("--gap", type=float)
    g.add_argument("--epsilon", type=float)
    g.add_argument("--truncation", type=_truncation, help="per-experiment sample cap or 'inf'")
    g.add_argument("--runs", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--fdr", choices=online_fdr.PROCEDURES)
    g.add_argument("--method", choices=METHODS)
    g.add_argument("--alpha", type=float)
    g.add_argument("--w0", type=float)
    g.add_argument("--data", help="captions CSV for --family caption")
    g.add_argument("--top-n", dest="top_n", type=int)
    parser.add_argument("--config", help="key=value config file; flags override it")
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--out", required=True, help="output directory")


def _parse_grid(text: str) -> tuple[str, list[float]]:
    if "=" not in text:
        raise ConfigError("grid must look like param=a:b:step or param=v1,v2,...")
    param, spec = text.split("=", 1)
    param = param.strip().replace("-", "_")
    if param not in ("truncation", "arms", "pi1"):
        raise ConfigError(f"cannot sweep {param!r}; choose truncation, arms, or pi1")
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError("range grid must be start:stop:step")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"bad grid range {spec!r}") from None
        if step <= 0:
            raise ConfigError("grid step must be positive")
        values = []
        v = start
        while v <= stop + 1e-12:
            values.append(round(v, 12))
            v += step
    else:
        try:
            values = [float(p) for p in spec.split(",") if p.strip()]
        except ValueError:
            raise ConfigError(f"bad grid list {spec!r}") from None
    if not values:
        raise ConfigError("empty grid")
    return param, values


def _apply_grid(config: ScenarioConfig, param: str, value: float) -> ScenarioConfig:
    if param == "truncation":
        return replace(config, truncation=float(int(value)))
    if param == "arms":
        return replace(config, arms=int(value))
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"pi1 grid value {value} outside [0, 1]")
    return replace(config, null_fraction=1.0 - value)


def _outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def cmd_simulate(args: argparse.Namespace) -> int:
    config = build_config(args)
    out = _outdir(args.out)
    results = run_many(config, jobs=args.jobs)
    audit_path = os.path.join(out, "audit.csv")
    aggregate_path = os.path.join(out, "aggregate.csv")
    write_audit(audit_path, config, results)
    write_aggregate(aggregate_path, [aggregate_row(config, results)])
    print(f"wrote {audit_path} and {aggregate_path}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    param, values = _parse_grid(args.grid)
    base = build_config(args)
    out = _outdir(args.out)
    rows = []
    for value in values:
        config = _apply_grid(base, param, value)
        config.validate()
        results = run_many(config, jobs=args.jobs)
        rows.append(aggregate_row(config, results))
        log.info("sweep %s=%g done", param, value)
    aggregate_path = os.path.join(out, "aggregate.csv")
    write_aggregate(aggregate_path, rows)
    print(f"wrote {aggregate_path} ({len(rows)} grid points)")
    return 0


# Stored floats carry 9 significant digits, so recomputed values must
# agree to a 5e-9 relative tolerance; p-vs-alpha comparisons get a band
# where either decision is accepted.
_REL_TOL = 5e-9
_DECISION_BAND = 1e-8


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= _REL_TOL * max(abs(a), abs(b))


def cmd_replay(args: argparse.Namespace) -> int:
    audit = read_audit(args.audit)
    if not audit.rows:
        raise DataError(f"{args.audit}: no data rows")
    runs: dict[int, list[dict]] = {}
    for row in audit.rows:
        runs.setdefault(row["run_id"], []).append(row)
    checked = 0
    for run_id, rows in runs.items():
        state = online_fdr.make_state(audit.fdr, audit.alpha, audit.w0)
        for row in rows:
            where = f"{args.audit}: run {run_id} j {row['j']}"
            expected = online_fdr.next_alpha(state)
            if not _close(expected, row["alpha_j"]):
                raise DataError(f"{where}: alpha_j {row['alpha_j']:.9g} != recomputed {expected:.9g}")
            p = row["pvalue"]
            if abs(p - expected) > _DECISION_BAND * max(expected, p):
                want = p <= expected and row["returned_arm"] != 0
                if want != row["rejected"]:
                    raise DataError(f"{where}: rejected={int(row['rejected'])} inconsistent "
                                    f"with pvalue {p:.9g} at alpha_j {expected:.9g}")
            online_fdr.record(state, row["rejected"])
            if not _close(state.wealth, row["wealth_after"]):
                raise DataError(f"{where}: wealth_after {row['wealth_after']:.9g} != "
                                f"recomputed {state.wealth:.9g}")
            checked += 1
    print(f"consistent ({checked} rows, {len(runs)} runs)")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mabfdr",
        description="Bandit experiments with always-valid p-values under online FDR control.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario; write audit and aggregate CSVs")
    _scenario_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a scenario across a one-parameter grid")
    _scenario_flags(p_sweep)
    p_sweep.add_argument("--grid", required=True,
                         help="param=start:stop:step or param=v1,v2,... "
                              "(param: truncation, arms, pi1)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_replay = sub.add_parser("replay", help="verify an audit CSV is self-consistent")
    p_replay.add_argument("audit", help="audit CSV path")
    p_replay.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
