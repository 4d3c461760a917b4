"""Always-valid p-values by inverting the confidence bounds.

The single-arm p-value is the largest gamma at which the alternative's
lower bound (at level gamma/2K) still fails to clear the control's upper
bound (at level gamma/2) plus epsilon:

    P = sup{gamma in (0, 1] :
            alt.mean - phi(n_alt, gamma/2K) <= control.mean + phi(n_0, gamma/2) + eps}.

The clamped phi makes the condition monotone in gamma, so the sup is found
by bisection. The experiment-level p-value is the running minimum over
times and arms, which is what makes it valid at any stopping time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .confidence import ArmStats, PhiCache, _lln, _log_terms

GAMMA_MIN = 1e-12
_BISECT_ITERS = 60


def _condition_holds(gamma: float, alt_mean: float, alt_pulls: int,
                     ctl_mean: float, ctl_pulls: int, K: int, epsilon: float) -> bool:
    lo = alt_mean - math.sqrt((_log_terms(gamma / (2.0 * K)) + _lln(alt_pulls)) / alt_pulls)
    hi = ctl_mean + math.sqrt((_log_terms(gamma / 2.0) + _lln(ctl_pulls)) / ctl_pulls)
    return lo <= hi + epsilon


def _bisect(alt_mean: float, alt_pulls: int, ctl_mean: float, ctl_pulls: int,
            K: int, epsilon: float) -> float:
    if _condition_holds(1.0, alt_mean, alt_pulls, ctl_mean, ctl_pulls, K, epsilon):
        return 1.0
    if not _condition_holds(GAMMA_MIN, alt_mean, alt_pulls, ctl_mean, ctl_pulls, K, epsilon):
        return GAMMA_MIN
    lo, hi = GAMMA_MIN, 1.0
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if _condition_holds(mid, alt_mean, alt_pulls, ctl_mean, ctl_pulls, K, epsilon):
            lo = mid
        else:
            hi = mid
    # lower bracket end: under-reports the sup by at most the bracket width
    return lo


def pvalue_single(alt: ArmStats, control: ArmStats, K: int, epsilon: float = 0.0) -> float:
    """Single-arm always-valid p-value in [GAMMA_MIN, 1].

    Args:
        alt: stats of the alternative arm being tested.
        control: stats of the control arm.
        K: number of alternative arms in the experiment.
        epsilon: precision slack, >= 0.

    Returns 1.0 when the condition holds at gamma = 1 (including the
    defensive empty-set convention); never returns below GAMMA_MIN.
    """
    if alt.pulls < 1 or control.pulls < 1:
        raise ValueError("p-value requires both arms pulled at least once")
    if K < 1:
        raise ValueError("K must be >= 1")
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    return _bisect(alt.mean, alt.pulls, control.mean, control.pulls, K, epsilon)


@dataclass
class PValueState:
    """Running minimum of per-arm p-values over the life of one experiment."""

    K: int
    epsilon: float = 0.0
    current: float = 1.0
    per_arm_last: list = field(default_factory=list)

    def update(self, all_alt_stats: Sequence[ArmStats], control_stats: ArmStats) -> "PValueState":
        """Fold one time step's per-arm p-values into the running minimum."""
        if len(all_alt_stats) != self.K:
            raise ValueError(f"expected {self.K} alternative arms, got {len(all_alt_stats)}")
        self.per_arm_last = [
            pvalue_single(alt, control_stats, self.K, self.epsilon) for alt in all_alt_stats
        ]
        step_min = min(self.per_arm_last)
        if step_min < self.current:
            self.current = step_min
        return self


class PMinTracker:
    """Incremental running-minimum p-value for the bandit's hot loop.

    Computes exactly the same running minimum as PValueState but only
    bisects for arms whose p-value can have dropped below the current
    minimum: an arm's condition fails at gamma = current iff its p-value
    is now smaller. Arms whose stats did not change since the last update
    cannot lower the minimum (their last p-value is >= current), and once
    the minimum hits GAMMA_MIN it can fall no further.
    """

    __slots__ = ("K", "epsilon", "current", "_a_alt", "_a_ctl",
                 "_ctl_mean", "_ctl_pulls")

    def __init__(self, K: int, epsilon: float = 0.0):
        self.K = K
        self.epsilon = epsilon
        self.current = 1.0
        self._refresh()
        self._ctl_mean = math.nan
        self._ctl_pulls = -1

    def _refresh(self) -> None:
        self._a_alt = _log_terms(self.current / (2.0 * self.K))
        self._a_ctl = _log_terms(self.current / 2.0)

    def update(self, means: Sequence[float], pulls: Sequence[int],
               changed: Sequence[int] | None = None) -> float:
        """Fold the current stats into the minimum; returns the new minimum.

        means/pulls cover all arms with index 0 the control. changed lists
        the arm indices pulled since the last update; None means all.
        """
        if self.current <= GAMMA_MIN:
            return self.current
        ctl_mean = means[0]
        ctl_pulls = pulls[0]
        if changed is not None and (ctl_mean != self._ctl_mean or ctl_pulls != self._ctl_pulls):
            changed = None  # control moved: every arm's p-value may have dropped
        self._ctl_mean = ctl_mean
        self._ctl_pulls = ctl_pulls

        ub = ctl_mean + math.sqrt((self._a_ctl + _lln(ctl_pulls)) / ctl_pulls) + self.epsilon
        a_alt = self._a_alt
        K = self.K
        eps = self.epsilon
        best = self.current
        scan = range(1, K + 1) if changed is None else changed
        for i in scan:
            if i == 0:
                continue
            n = pulls[i]
            if means[i] - math.sqrt((a_alt + _lln(n)) / n) > ub:
                p = _bisect(means[i], n, ctl_mean, ctl_pulls, K, eps)
                if p < best:
                    best = p
        if best < self.current:
            self.current = best
            self._refresh()
        return self.current
