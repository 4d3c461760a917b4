"""Best-arm identification with a control arm, plus the round-robin comparator.

The adaptive sampler pulls the empirical leader h_t and the strongest
challenger l_t (by upper bound) each iteration, stopping when either the
control dominates every alternative or the leader separates from both the
challenger and the control. Arm 0 is always the control. The round-robin
sampler pulls every arm once per round and applies the same stopping rule.

Both samplers maintain the experiment's running-minimum p-value so the
outcome can be tested against any level after the fact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .confidence import ArmStats, PhiCache, lcb, ucb
from .errors import ConfigError
from .pvalue import PMinTracker
from .rewards import ArmModel, ArmSampler, SeededStream


@dataclass
class BanditConfig:
    """Run parameters for one experiment.

    delta: confidence level for the stopping rule, in (0, 1).
    epsilon: precision slack, >= 0.
    truncation: cap on total pulls (math.inf for none).
    K: number of alternative arms (arms are 0..K with 0 the control).
    """

    delta: float
    K: int
    epsilon: float = 0.0
    truncation: float = math.inf

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta {self.delta} outside (0, 1)")
        if self.epsilon < 0.0:
            raise ConfigError("epsilon must be >= 0")
        if self.K < 1:
            raise ConfigError("need at least one alternative arm")
        if self.truncation != math.inf:
            if self.truncation != int(self.truncation):
                raise ConfigError("truncation must be an integer or inf")
            if self.truncation < self.K + 1:
                raise ConfigError("truncation must cover the initialization round")


@dataclass
class BanditOutcome:
    returned_arm: int
    stop_time: int
    final_pvalue: float
    pulls_per_arm: list[int]
    truncated: bool


def _scan(means: Sequence[float], lcbs: Sequence[float], ucbs: Sequence[float],
          epsilon: float) -> tuple[int | None, int, int, int]:
    """One pass of the stopping rule.

    Returns (decision, h, l, u): decision is 0 for the control, h for a
    winning alternative, or None to continue; h is the empirical leader
    over all arms, l the best upper bound over arms other than h (control
    included), u the best upper bound among alternatives. All argmax ties
    break toward the lowest index. l is -1 when the control wins outright.
    """
    n = len(means)
    h, hv = 0, means[0]
    for i in range(1, n):
        if means[i] > hv:
            h, hv = i, means[i]
    lcb0 = lcbs[0]
    control_wins = True
    u, uv = 1, ucbs[1]
    for i in range(1, n):
        w = ucbs[i]
        if control_wins and lcb0 <= w - epsilon:
            control_wins = False
        if w > uv:
            u, uv = i, w
    if control_wins:
        return 0, h, -1, u
    if h != 0:
        l, lv = 0, ucbs[0]
    else:
        l, lv = -1, -math.inf
    for i in range(1, n):
        if i != h and ucbs[i] > lv:
            l, lv = i, ucbs[i]
    if lcbs[h] > lv - epsilon and lcbs[h] > ucbs[0] + epsilon:
        return h, h, l, u
    return None, h, l, u


def check_termination(all_stats: Sequence[ArmStats], delta: float, epsilon: float,
                      K: int) -> int | None:
    """Evaluate the stopping rule on arm stats.

    Returns 0 for the control, h for a winning alternative, or None to
    continue. A winning alternative must clear both the challenger's and
    the control's upper bounds, so it is never arm 0.
    """
    if len(all_stats) != K + 1:
        raise ValueError(f"expected {K + 1} arms, got {len(all_stats)}")
    if any(s.pulls < 1 for s in all_stats):
        raise ValueError("every arm must be pulled before checking termination")
    means = [s.mean for s in all_stats]
    lcbs = [lcb(s, delta, K) for s in all_stats]
    ucbs = [ucb(s, delta) for s in all_stats]
    return _scan(means, lcbs, ucbs, epsilon)[0]


class _Engine:
    """Shared state and pull bookkeeping for both samplers."""

    def __init__(self, models: Sequence[ArmModel], config: BanditConfig,
                 streams: Sequence[SeededStream]):
        if len(models) != config.K + 1:
            raise ConfigError(f"expected {config.K + 1} models, got {len(models)}")
        if len(streams) != len(models):
            raise ConfigError("need one stream per arm")
        self.config = config
        self.samplers = [ArmSampler(m, s) for m, s in zip(models, streams)]
        n = len(models)
        self.counts = [0] * n
        self.means = [0.0] * n
        self.lcbs = [0.0] * n
        self.ucbs = [0.0] * n
        self._lcb_phi = PhiCache(config.delta / (2.0 * config.K))
        self._ucb_phi = PhiCache(config.delta / 2.0)
        self.tracker = PMinTracker(config.K, config.epsilon)
        self.t = 0

    def pull(self, i: int) -> None:
        x = self.samplers[i].draw()
        c = self.counts[i] + 1
        self.counts[i] = c
        m = self.means[i] + (x - self.means[i]) / c
        self.means[i] = m
        self.lcbs[i] = m - self._lcb_phi.value(c)
        self.ucbs[i] = m + self._ucb_phi.value(c)
        self.t += 1

    def outcome(self, arm: int, truncated: bool) -> BanditOutcome:
        return BanditOutcome(arm, self.t, self.tracker.current, list(self.counts), truncated)

    def truncation_winner(self) -> int:
        return max(range(len(self.means)), key=self.means.__getitem__)


def run_lucb(models: Sequence[ArmModel], config: BanditConfig,
             streams: Sequence[SeededStream]) -> BanditOutcome:
    """Run the adaptive sampler to its stopping time or the truncation cap.

    Pulls every arm once, then repeats: check the stopping rule; if
    continuing with epsilon > 0, pull the distinct arms among {0, u_t,
    h_t, l_t}, else pull h_t and l_t. The p-value folds in after every
    pull batch. When the cap lands mid-batch, remaining pulls are dropped
    in index order and the empirical-mean leader is returned truncated.
    """
    eng = _Engine(models, config, streams)
    n = config.K + 1
    M = config.truncation
    for i in range(n):
        eng.pull(i)
    eng.tracker.update(eng.means, eng.counts, None)
    means, lcbs, ucbs = eng.means, eng.lcbs, eng.ucbs
    eps = config.epsilon
    while True:
        decision, h, l, u = _scan(means, lcbs, ucbs, eps)
        if decision is not None:
            return eng.outcome(decision, truncated=False)
        if eng.t >= M:
            return eng.outcome(eng.truncation_winner(), truncated=True)
        if eps > 0.0:
            batch = sorted({0, u, h, l})
        else:
            batch = (h, l) if h < l else (l, h)
        for i in batch:
            eng.pull(i)
            if eng.t >= M:
                break
        eng.tracker.update(means, eng.counts, batch)


def run_uniform(models: Sequence[ArmModel], config: BanditConfig,
                streams: Sequence[SeededStream]) -> BanditOutcome:
    """Round-robin over arms 0..K with the same stopping rule per round."""
    eng = _Engine(models, config, streams)
    n = config.K + 1
    M = config.truncation
    while True:
        full_round = True
        for i in range(n):
            eng.pull(i)
            if eng.t >= M:
                full_round = i == n - 1
                break
        eng.tracker.update(eng.means, eng.counts, None)
        if full_round:
            decision = _scan(eng.means, eng.lcbs, eng.ucbs, config.epsilon)[0]
            if decision is not None:
                return eng.outcome(decision, truncated=False)
        if eng.t >= M:
            return eng.outcome(eng.truncation_winner(), truncated=True)
