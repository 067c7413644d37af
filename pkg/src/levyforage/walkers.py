"""Jump-length policies that plug into the forager.

Every policy exposes ``draw(rng) -> float`` (the commanded flight length)
and consumes exactly one uniform per draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError
from .rng import SeededRng
from .sampler import JumpLaw

LEVY = "levy"
BROWNIAN = "brownian"
UNIFORM = "uniform-random"
WALKER_KINDS = (LEVY, BROWNIAN, UNIFORM)


@dataclass(frozen=True)
class LevyWalker:
    law: JumpLaw
    kind: str = LEVY

    def draw(self, rng: SeededRng) -> float:
        return self.law.quantile(rng.uniform_pos())


@dataclass(frozen=True)
class BrownianWalker:
    """Half-normal lengths with mean ``scale``."""

    scale: float
    kind: str = BROWNIAN

    def draw(self, rng: SeededRng) -> float:
        return abs(rng.normal()) * self.scale * math.sqrt(math.pi / 2.0)


@dataclass(frozen=True)
class UniformWalker:
    low: float
    high: float
    kind: str = UNIFORM

    def __post_init__(self):
        if not (0 < self.low <= self.high < math.inf):
            raise ParameterError("uniform walker needs 0 < low <= high < inf")

    def draw(self, rng: SeededRng) -> float:
        return self.low + (self.high - self.low) * rng.uniform()


def make_walker(kind: str, law: JumpLaw):
    """Policy of the given kind sharing ``law``'s length scales."""
    if kind == LEVY:
        return LevyWalker(law)
    if kind == BROWNIAN:
        return BrownianWalker(law.ell_min)
    if kind == UNIFORM:
        return UniformWalker(law.ell_min, law.ell_max)
    raise ParameterError(f"unknown walker kind {kind!r}")
