"""Finite law-of-the-iterated-logarithm deviation bound and confidence bounds.

The deviation function is

    phi_n(delta) = sqrt([ln(1/d) + 3 ln(ln(1/d)) + 1.5 ln(ln(e n))] / n),

with d = min(delta, 0.1). The clamp keeps the radicand positive for every
delta in (0, 1), which the p-value inversion relies on. Natural logs
throughout. The lower bound spends delta/(2K), the upper bound delta/2;
the asymmetry is deliberate and load-bearing for the stopping rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DELTA_CLAMP = 0.1


@dataclass
class ArmStats:
    """Pull count and reward sum for one arm; mean is derived."""

    pulls: int = 0
    sum: float = 0.0

    def add(self, x: float) -> None:
        self.pulls += 1
        self.sum += x

    @property
    def mean(self) -> float:
        if self.pulls < 1:
            raise ValueError("mean undefined before the first pull")
        return self.sum / self.pulls


def phi(n, delta):
    """Deviation bound phi_n(min(delta, 0.1)); accepts scalars or arrays.

    Args:
        n: pull count(s), integer >= 1.
        delta: confidence parameter(s) in (0, 1).

    Returns:
        Strictly positive bound value(s), scalar if both inputs are scalars.
    """
    n_arr = np.asarray(n)
    d_arr = np.asarray(delta, dtype=np.float64)
    if np.any(n_arr < 1):
        raise ValueError("phi requires n >= 1")
    if np.any(d_arr <= 0.0) or np.any(d_arr >= 1.0):
        raise ValueError("phi requires delta in (0, 1)")
    d = np.minimum(d_arr, DELTA_CLAMP)
    li = np.log(1.0 / d)
    num = li + 3.0 * np.log(li) + 1.5 * np.log(np.log(np.e * n_arr))
    out = np.sqrt(num / n_arr)
    if np.isscalar(n) and np.isscalar(delta):
        return float(out)
    return out


def lcb(stats: ArmStats, delta: float, K: int) -> float:
    """Lower confidence bound mean - phi(pulls, delta / (2K))."""
    if stats.pulls < 1:
        raise ValueError("lcb requires a pulled arm")
    if K < 1:
        raise ValueError("lcb requires K >= 1")
    return stats.mean - phi(stats.pulls, delta / (2.0 * K))


def ucb(stats: ArmStats, delta: float) -> float:
    """Upper confidence bound mean + phi(pulls, delta / 2)."""
    if stats.pulls < 1:
        raise ValueError("ucb requires a pulled arm")
    return stats.mean + phi(stats.pulls, delta / 2.0)


# Scalar fast path. The bandit loop evaluates phi millions of times on
# single (n, delta) pairs, where numpy dispatch overhead dominates; these
# helpers share one growing table of the 1.5*ln(ln(e*n)) term.

_LLN: list[float] = [0.0, 0.0]  # _LLN[n] = 1.5*ln(ln(e*n)); index 0 unused


def _lln(n: int) -> float:
    table = _LLN
    if n >= len(table):
        log = math.log
        for m in range(len(table), n + 1):
            table.append(1.5 * log(log(math.e * m)))
    return table[n]


def _log_terms(delta: float) -> float:
    """ln(1/d) + 3 ln(ln(1/d)) with the 0.1 clamp applied."""
    d = delta if delta < DELTA_CLAMP else DELTA_CLAMP
    li = math.log(1.0 / d)
    return li + 3.0 * math.log(li)


def phi_scalar(n: int, delta: float) -> float:
    """Scalar phi identical in value to phi(); no numpy dispatch."""
    return math.sqrt((_log_terms(delta) + _lln(n)) / n)


class PhiCache:
    """phi at a fixed delta with the delta-dependent terms precomputed."""

    __slots__ = ("a",)

    def __init__(self, delta: float):
        self.a = _log_terms(delta)

    def value(self, n: int) -> float:
        return math.sqrt((self.a + _lln(n)) / n)
