"""Scenario generation and the sequential meta-procedure over many experiments.

A scenario fixes the truth labels and per-hypothesis arm means once from
the scenario seed; Monte Carlo runs then differ only in reward noise. Each
run walks hypotheses in order: ask the FDR state for a level, run the
bandit at that confidence, reject when the final p-value clears the level
and the returned arm is not the control, and feed the decision back into
the FDR state.

Stream routing (namespace, indices) keeps every random draw addressable:
rewards (0, run, j, arm), means (1, j), truth labels (2,), and the
direct-draw null p-values (3, run, j).
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import online_fdr
from .bestarm import BanditConfig, run_lucb, run_uniform
from .errors import ConfigError, DataError
from .metrics import ExperimentRecord, bdr, fdp, mfdr_estimate
from .rewards import BERNOULLI, GAUSSIAN, ArmModel, SeededStream

log = logging.getLogger(__name__)

GAUSSIAN_FAMILY = "gaussian"
BERNOULLI_FAMILY = "bernoulli"
CAPTION_FAMILY = "caption"
UNIFORM_NULL_P = "uniform-null-p"
FAMILIES = (GAUSSIAN_FAMILY, BERNOULLI_FAMILY, CAPTION_FAMILY, UNIFORM_NULL_P)

MAB = "mab"
AB = "ab"
METHODS = (MAB, AB)

FAMILY_DEFAULTS = {
    GAUSSIAN_FAMILY: (8.0, 3.0),
    BERNOULLI_FAMILY: (0.4, 0.3),
    UNIFORM_NULL_P: (8.0, 3.0),
}

# stream route namespaces
_REWARDS, _MEANS, _TRUTH, _NULL_P = 0, 1, 2, 3


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce a batch of runs."""

    family: str = GAUSSIAN_FAMILY
    hypotheses: int = 500
    null_fraction: float = 0.6
    arms: int = 51
    best_mean: float = 8.0
    gap: float = 3.0
    epsilon: float = 0.0
    truncation: float = math.inf
    runs: int = 1
    seed: int = 0
    fdr: str = online_fdr.LORD
    method: str = MAB
    alpha: float = 0.1
    w0: float | None = None
    data_path: str | None = None
    top_n: int = 10

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.hypotheses < 1:
            raise ConfigError("hypotheses must be >= 1")
        if not 0.0 <= self.null_fraction <= 1.0:
            raise ConfigError("null_fraction must be in [0, 1]")
        if self.arms < 2:
            raise ConfigError("need a control and at least one alternative")
        if self.gap <= 0 or self.gap > self.best_mean:
            raise ConfigError("gap must be in (0, best_mean]")
        if self.family == BERNOULLI_FAMILY and not 0.0 < self.best_mean <= 1.0:
            raise ConfigError("bernoulli best_mean must be in (0, 1]")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if self.truncation != math.inf and self.truncation < self.arms:
            raise ConfigError("truncation must be at least the arm count")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.fdr not in online_fdr.PROCEDURES:
            raise ConfigError(f"unknown fdr procedure {self.fdr!r}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must be in (0, 1)")
        if self.w0 is not None and not 0.0 < self.w0 < self.alpha:
            raise ConfigError("w0 must be in (0, alpha)")
        if self.family == CAPTION_FAMILY:
            if self.data_path is None:
                raise ConfigError("caption family requires data_path")
            if self.top_n < 2:
                raise ConfigError("top_n must be >= 2")

    @property
    def scenario_id(self) -> str:
        pi1 = 1.0 - self.null_fraction
        return f"{self.family}|pi1={pi1:.9g}"


def default_config(family: str, **overrides) -> ScenarioConfig:
    """A config with the family's customary best mean and gap filled in."""
    best, gap = FAMILY_DEFAULTS.get(family, FAMILY_DEFAULTS[GAUSSIAN_FAMILY])
    base = ScenarioConfig(family=family, best_mean=best, gap=gap)
    return replace(base, **overrides)


@dataclass
class CaptionDataset:
    """Per-contest caption summaries in chronological contest order."""

    contests: list[tuple[int, list[tuple[str, float, int]]]]


def load_captions(path: str) -> CaptionDataset:
    """Read a captions CSV with header contest_id, caption_id, mean, count."""
    header = ["contest_id", "caption_id", "mean", "count"]
    by_contest: dict[int, list[tuple[str, float, int]]] = {}
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read captions file {path}: {e}") from e
    with fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty captions file") from None
        if [c.strip() for c in first] != header:
            raise DataError(f"{path}: expected header {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataError(f"{path} line {lineno}: expected 4 fields, got {len(row)}")
            try:
                contest = int(row[0])
                mean = float(row[2])
                count = int(row[3])
            except ValueError as e:
                raise DataError(f"{path} line {lineno}: {e}") from e
            if not 0.0 <= mean <= 1.0:
                raise DataError(f"{path} line {lineno}: mean {mean} outside [0, 1]")
            by_contest.setdefault(contest, []).append((row[1], mean, count))
    if not by_contest:
        raise DataError(f"{path}: no caption rows")
    contests = [(cid, by_contest[cid]) for cid in sorted(by_contest)]
    return CaptionDataset(contests)


@dataclass
class ScenarioPlan:
    """Truth labels and arm means, fixed across runs for one scenario."""

    is_null: np.ndarray
    control_means: np.ndarray
    alt_means: np.ndarray
    reward_kind: str


def _truth_labels(config: ScenarioConfig, J: int) -> np.ndarray:
    n_null = math.ceil(config.null_fraction * J)
    gen = SeededStream(config.seed, (_TRUTH,)).generator()
    null_idx = gen.choice(J, size=n_null, replace=False)
    labels = np.zeros(J, dtype=bool)
    labels[null_idx] = True
    return labels


def generate_means(config: ScenarioConfig, j: int, is_null: bool,
                   stream: SeededStream | None = None) -> tuple[float, np.ndarray]:
    """Control mean and alternative means for hypothesis j.

    Null: the control takes the best mean, every alternative is uniform
    on [0, best - gap]. Non-null: one uniformly chosen alternative takes
    the best mean; the control and the rest are uniform on [0, best - gap].
    """
    if stream is None:
        stream = SeededStream(config.seed, (_MEANS, j))
    gen = stream.generator()
    K = config.arms - 1
    mu2 = config.best_mean - config.gap
    if is_null:
        return config.best_mean, gen.uniform(0.0, mu2, K)
    best = int(gen.integers(K))
    alts = gen.uniform(0.0, mu2, K)
    alts[best] = config.best_mean
    control = float(gen.uniform(0.0, mu2))
    return control, alts


def caption_scenario(dataset: CaptionDataset, config: ScenarioConfig) -> ScenarioPlan:
    """Arm means per contest: top-n captions by empirical mean.

    Contests with fewer than top_n captions are skipped with a warning.
    For null-labeled hypotheses the top caption plays control; otherwise
    the weakest caption of the pool does, making the labels true.
    """
    pools = []
    for contest, rows in dataset.contests:
        if len(rows) < config.top_n:
            log.warning("contest %d skipped: %d captions < top_n=%d",
                        contest, len(rows), config.top_n)
            continue
        ranked = sorted(rows, key=lambda r: -r[1])[: config.top_n]
        pools.append([m for _, m, _ in ranked])
    if not pools:
        raise DataError("no contest has enough captions for the requested top_n")
    pools = pools[: config.hypotheses]
    J = len(pools)
    labels = _truth_labels(config, J)
    K = config.top_n - 1
    control = np.empty(J)
    alts = np.empty((J, K))
    for j, pool in enumerate(pools):
        if labels[j]:
            control[j] = pool[0]
            alts[j] = pool[1:]
        else:
            control[j] = pool[-1]
            alts[j] = pool[:-1]
    return ScenarioPlan(labels, control, alts, BERNOULLI)


def build_plan(config: ScenarioConfig) -> ScenarioPlan:
    """Materialize truth labels and means for every hypothesis."""
    config.validate()
    if config.family == CAPTION_FAMILY:
        return caption_scenario(load_captions(config.data_path), config)
    J = config.hypotheses
    labels = _truth_labels(config, J)
    K = config.arms - 1
    control = np.full(J, math.nan)
    alts = np.full((J, K), math.nan)
    for j in range(J):
        if config.family == UNIFORM_NULL_P and labels[j]:
            continue  # no bandit for these; the p-value is drawn directly
        control[j], alts[j] = generate_means(config, j, bool(labels[j]))
    kind = BERNOULLI if config.family == BERNOULLI_FAMILY else GAUSSIAN
    return ScenarioPlan(labels, control, alts, kind)


@dataclass
class RunResult:
    """Records plus post-update wealth for one run."""

    run: int
    records: list[ExperimentRecord]
    wealth: list[float] = field(default_factory=list)

    @property
    def total_samples(self) -> int:
        return sum(r.samples for r in self.records)


def run_one(config: ScenarioConfig, plan: ScenarioPlan, run: int) -> RunResult:
    """Execute one full pass over the hypothesis sequence."""
    state = online_fdr.make_state(config.fdr, config.alpha, config.w0)
    sampler = run_lucb if config.method == MAB else run_uniform
    K = plan.alt_means.shape[1]
    records: list[ExperimentRecord] = []
    wealth: list[float] = []
    for j in range(len(plan.is_null)):
        a_j = online_fdr.next_alpha(state)
        is_null = bool(plan.is_null[j])
        if config.family == UNIFORM_NULL_P and is_null:
            p = float(SeededStream(config.seed, (_NULL_P, run, j)).generator().random())
            rejected = p <= a_j
            rec = ExperimentRecord(
                j=j + 1, is_null=True, alpha_j=a_j, pvalue=p, rejected=rejected,
                returned_arm=-1, returned_mean=math.nan, control_mean=math.nan,
                best_mean=math.nan, samples=0, truncated=False)
        else:
            control_mean = float(plan.control_means[j])
            alt_means = plan.alt_means[j]
            models = [ArmModel(plan.reward_kind, control_mean)] + [
                ArmModel(plan.reward_kind, float(m)) for m in alt_means]
            streams = [SeededStream(config.seed, (_REWARDS, run, j, arm))
                       for arm in range(K + 1)]
            bcfg = BanditConfig(delta=a_j, K=K, epsilon=config.epsilon,
                                truncation=config.truncation)
            out = sampler(models, bcfg, streams)
            rejected = out.final_pvalue <= a_j and out.returned_arm != 0
            returned_mean = control_mean if out.returned_arm == 0 \
                else float(alt_means[out.returned_arm - 1])
            rec = ExperimentRecord(
                j=j + 1, is_null=is_null, alpha_j=a_j, pvalue=out.final_pvalue,
                rejected=rejected, returned_arm=out.returned_arm,
                returned_mean=returned_mean, control_mean=control_mean,
                best_mean=float(alt_means.max()), samples=out.stop_time,
                truncated=out.truncated)
        online_fdr.record(state, rec.rejected)
        records.append(rec)
        wealth.append(state.wealth)
    return RunResult(run, records, wealth)


def _run_task(args: tuple[ScenarioConfig, ScenarioPlan, int]) -> RunResult:
    return run_one(*args)


def run_meta(config: ScenarioConfig, plan: ScenarioPlan | None = None) -> list[RunResult]:
    """All runs of a scenario, sequentially."""
    if plan is None:
        plan = build_plan(config)
    return [run_one(config, plan, r) for r in range(config.runs)]


def run_many(config: ScenarioConfig, jobs: int = 1) -> list[RunResult]:
    """All runs of a scenario, optionally across processes.

    Results are ordered by run index regardless of completion order, so
    output does not depend on the degree of parallelism.
    """
    plan = build_plan(config)
    if jobs <= 1 or config.runs == 1:
        return run_meta(config, plan)
    tasks = [(config, plan, r) for r in range(config.runs)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, tasks))


def aggregate_row(config: ScenarioConfig, results: Sequence[RunResult]) -> dict:
    """One summary row for a batch of runs, keyed by the aggregate CSV schema."""
    runs = [r.records for r in results]
    return {
        "method": config.method,
        "fdr_procedure": config.fdr,
        "scenario_id": config.scenario_id,
        "J": len(runs[0]) if runs else 0,
        "runs": len(results),
        "mfdr": mfdr_estimate(runs),
        "fdr_mean": float(np.mean([fdp(rec) for rec in runs])),
        "bdr": float(np.mean([bdr(rec, config.epsilon) for rec in runs])),
        "mean_samples": float(np.mean([r.total_samples for r in results])),
        "truncation": config.truncation,
        "arms": config.arms,
    }
