"""Online FDR state machines mapping a rejection history to the next level.

Four procedures share one state type:

  lord         alpha_j = gamma(j - tau) * wealth banked at the last rejection;
               wealth update W <- W - alpha_j + R_j * (alpha - w0).
  lord15       alpha_j = alpha * gamma(j - tau); wealth resets to alpha on
               each rejection; between rejections levels sum to at most alpha.
  bonferroni   alpha_j = 6 * alpha / (pi^2 * j^2); summing to alpha exactly.
  independent  alpha_j = alpha for every j (no correction at all).

gamma(j) = 0.07 * ln(max(j, 2)) / (j * exp(sqrt(ln j))) is kept exactly as
stated, without renormalizing; its partial sums stay below 1, which is what
keeps lord's wealth nonnegative.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

log = logging.getLogger(__name__)

ALPHA_MIN = 1e-12

LORD = "lord"
LORD15 = "lord15"
BONFERRONI = "bonferroni"
INDEPENDENT = "independent"
PROCEDURES = (LORD, LORD15, BONFERRONI, INDEPENDENT)


def gamma(j: int) -> float:
    """The level allocation sequence; j >= 1. Natural logs; sqrt(ln 1) = 0."""
    if j < 1:
        raise ValueError("gamma requires j >= 1")
    return 0.07 * math.log(max(j, 2)) / (j * math.exp(math.sqrt(math.log(j))))


def gamma_values(n: int) -> np.ndarray:
    """gamma(1..n) as an array, for partial-sum checks at large n."""
    j = np.arange(1, n + 1, dtype=np.float64)
    return 0.07 * np.log(np.maximum(j, 2.0)) / (j * np.exp(np.sqrt(np.log(j))))


@dataclass
class FdrState:
    """Sequential testing state; one per simulation run.

    wealth is W(j), the wealth available before testing hypothesis j;
    base_wealth is the wealth banked at the last rejection (w0 before any),
    which is what lord's levels spend from; last_rejection is tau_j.
    """

    kind: str
    alpha: float
    w0: float
    wealth: float = field(init=False)
    base_wealth: float = field(init=False)
    last_rejection: int = 0
    j: int = 1
    history: list[bool] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.kind not in PROCEDURES:
            raise ConfigError(f"unknown procedure {self.kind!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha {self.alpha} outside (0, 1)")
        if not 0.0 < self.w0 < self.alpha:
            raise ConfigError(f"w0 {self.w0} outside (0, alpha)")
        self.wealth = self.alpha if self.kind == LORD15 else self.w0
        self.base_wealth = self.w0


def make_state(kind: str, alpha: float, w0: float | None = None) -> FdrState:
    """Fresh state; w0 defaults to alpha / 2."""
    return FdrState(kind=kind, alpha=alpha, w0=alpha / 2.0 if w0 is None else w0)


def next_alpha(state: FdrState) -> float:
    """The test level for the current hypothesis index, floored at ALPHA_MIN."""
    if state.kind == LORD:
        a = gamma(state.j - state.last_rejection) * state.base_wealth
    elif state.kind == LORD15:
        a = state.alpha * gamma(state.j - state.last_rejection)
    elif state.kind == BONFERRONI:
        a = 6.0 * state.alpha / (math.pi * math.pi * state.j * state.j)
    else:
        a = state.alpha
    if a < ALPHA_MIN:
        log.warning("level %.3g floored to %.0e at j=%d", a, ALPHA_MIN, state.j)
        a = ALPHA_MIN
    return a


def record(state: FdrState, rejected: bool) -> FdrState:
    """Consume one test result, advancing to the next hypothesis index."""
    a_j = next_alpha(state)
    j = state.j
    if state.kind == LORD:
        state.wealth -= a_j
        if rejected:
            state.wealth += state.alpha - state.w0
            state.last_rejection = j
            state.base_wealth = state.wealth
    elif state.kind == LORD15:
        if rejected:
            state.wealth = state.alpha
            state.last_rejection = j
        else:
            state.wealth -= a_j
    if state.wealth < 0.0:
        raise RuntimeError(
            f"wealth went negative ({state.wealth:.3e}) at j={j}: invariant violation")
    state.history.append(bool(rejected))
    state.j = j + 1
    return state
