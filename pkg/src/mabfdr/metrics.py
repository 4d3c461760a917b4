"""Error and power metrics over sequences of experiment records.

FDP and its batch mean estimate FDR; mFDR is the ratio-of-means variant
with the +1 denominator; the discovery rate counts rejections that
returned an arm both near-best and epsilon-above the control. Gap
diagnostics expose the effective-gap systems that predict stopping times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


@dataclass
class ExperimentRecord:
    """Outcome of one experiment inside a run."""

    j: int
    is_null: bool
    alpha_j: float
    pvalue: float
    rejected: bool
    returned_arm: int
    returned_mean: float
    control_mean: float
    best_mean: float
    samples: int
    truncated: bool


def fdp(records: Sequence[ExperimentRecord]) -> float:
    """False discovery proportion: rejected nulls over rejections (or 1)."""
    rejected = sum(1 for r in records if r.rejected)
    false = sum(1 for r in records if r.rejected and r.is_null)
    return false / max(1, rejected)


def mfdr_estimate(runs: Sequence[Sequence[ExperimentRecord]]) -> float:
    """Mean false discoveries over mean discoveries plus one, across runs."""
    if not runs:
        raise ValueError("mfdr_estimate needs at least one run")
    n = len(runs)
    false = sum(1 for records in runs for r in records if r.rejected and r.is_null)
    total = sum(1 for records in runs for r in records if r.rejected)
    return (false / n) / (total / n + 1.0)


def bdr(records: Sequence[ExperimentRecord], epsilon: float = 0.0) -> float:
    """Fraction of non-nulls rejected with a near-best, above-control arm.

    A rejection counts only when the returned arm's true mean is within
    epsilon of the best alternative and at least epsilon above the
    control. Returns 0 when there are no non-nulls.
    """
    non_nulls = [r for r in records if not r.is_null]
    if not non_nulls:
        return 0.0
    hits = sum(
        1 for r in non_nulls
        if r.rejected
        and r.returned_mean >= r.best_mean - epsilon
        and r.returned_mean >= r.control_mean + epsilon
    )
    return hits / len(non_nulls)


def target_set(means: Sequence[float], control_mean: float, epsilon: float = 0.0) -> set[int]:
    """Acceptable winners among alternatives, as 1-based arm indices.

    An arm qualifies when its mean is within epsilon of the best
    alternative and strictly more than epsilon above the control.
    """
    if not means:
        return set()
    best = max(means)
    return {
        i + 1
        for i, m in enumerate(means)
        if m >= best - epsilon and m > control_mean + epsilon
    }


@dataclass
class GapDiagnostics:
    """Gap structure of one arm configuration.

    deltas[i] is the best mean minus arm i's mean (for the best arm
    itself, its lead over the runner-up). The two effective-gap lists
    correspond to the control-wins case and the alternative-wins case;
    predicted_complexity sums inverse-square effective gaps of whichever
    case holds, with the usual doubly-log level factor.
    """

    deltas: list[float]
    effective_gaps_null: list[float]
    effective_gaps_alt: list[float]
    predicted_complexity: float


def gap_diagnostics(mu: Sequence[float], epsilon: float, delta: float) -> GapDiagnostics:
    """Diagnostics for arm means mu (index 0 the control) at slack epsilon.

    delta is the confidence level entering the predicted complexity.
    """
    n = len(mu)
    if n < 2:
        raise ValueError("need a control and at least one alternative")
    K = n - 1
    i_star = max(range(n), key=mu.__getitem__)
    runner_up = max(mu[i] for i in range(n) if i != i_star)
    deltas = [mu[i_star] - runner_up if i == i_star else mu[i_star] - mu[i] for i in range(n)]

    best_alt = max(mu[1:])
    null_holds = mu[0] + epsilon > best_alt
    gaps_null = [(mu[0] + epsilon) - best_alt] + [(mu[0] + epsilon) - mu[i] for i in range(1, n)]
    lead = best_alt - (mu[0] + epsilon)
    gaps_alt = [min(lead, max(deltas[0], epsilon))] + [
        max(deltas[i], min(lead, epsilon)) for i in range(1, n)
    ]

    gaps = gaps_null if null_holds else gaps_alt
    total = 0.0
    for g in gaps:
        if g <= 0.0:
            total = math.inf
            break
        # inner log clamped at 1 so large gaps cannot flip the level factor's sign
        inner = max(math.log(g ** -2), 1.0)
        total += g ** -2 * math.log(K * inner / delta)
    return GapDiagnostics(deltas, gaps_null, gaps_alt, total)
