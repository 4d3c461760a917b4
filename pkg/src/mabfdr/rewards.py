"""Arm reward models and seed-reproducible sampling streams.

Each (seed, route) pair names an independent random stream via numpy's
SeedSequence splitting, with Philox underneath, so draws depend only on
the stream identity and position, never on scheduling or interleaving.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

GAUSSIAN = "gaussian"
BERNOULLI = "bernoulli"


@dataclass
class ArmModel:
    """A single arm's reward distribution.

    kind: "gaussian" (unit variance) or "bernoulli".
    mean: expected reward.
    scale: sub-Gaussian scale, fixed at 1.0.
    """

    kind: str
    mean: float
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in (GAUSSIAN, BERNOULLI):
            raise ConfigError(f"unknown arm kind {self.kind!r}")
        if self.kind == BERNOULLI and not 0.0 <= self.mean <= 1.0:
            raise ConfigError(f"bernoulli mean {self.mean} outside [0, 1]")
        if self.scale != 1.0:
            raise ConfigError("sub-gaussian scale is fixed at 1.0")


@dataclass
class SeededStream:
    """An independent random stream identified by (seed, route).

    route is a tuple of small integers, e.g. (namespace, run, hypothesis, arm).
    Streams with distinct routes are independent by the SeedSequence
    splitting construction; replaying a (seed, route) pair reproduces the
    identical draw sequence.
    """

    seed: int
    route: tuple[int, ...]
    position: int = 0
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.route)
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen


def draw(model: ArmModel, stream: SeededStream) -> float:
    """One reward from the arm, advancing the stream by one position."""
    gen = stream.generator()
    stream.position += 1
    if model.kind == GAUSSIAN:
        return model.mean + gen.standard_normal()
    return 1.0 if gen.random() < model.mean else 0.0


class ArmSampler:
    """Block-buffered draws from one (model, stream) pair.

    Buffered and unbuffered paths consume the generator identically
    (numpy block draws match repeated scalar draws), so the sequence is
    the same as calling draw() repeatedly.
    """

    __slots__ = ("model", "stream", "_buf", "_next")

    def __init__(self, model: ArmModel, stream: SeededStream, block: int = 128):
        self.model = model
        self.stream = stream
        self._buf: np.ndarray | None = None
        self._next = block  # forces a refill on first draw

    def draw(self) -> float:
        buf = self._buf
        if buf is None or self._next >= len(buf):
            gen = self.stream.generator()
            if self.model.kind == GAUSSIAN:
                buf = self.model.mean + gen.standard_normal(128)
            else:
                buf = (gen.random(128) < self.model.mean).astype(np.float64)
            self._buf = buf
            self._next = 0
        x = buf[self._next]
        self._next += 1
        self.stream.position += 1
        return float(x)
