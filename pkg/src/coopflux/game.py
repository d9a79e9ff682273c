"""Weak prisoner's dilemma: payoffs, per-generation fitness, strategy displacement."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DegenerateDegree, InvalidParams
from .network import Network, Strategy
from .rng import RandomSource, bitgen


@dataclass(frozen=True)
class PayoffParams:
    """Temptation ``b``; the other entries are fixed at R=1, P=S=0.

    ``b == 1`` is accepted as the boundary case (the sweeps start there).
    """

    b: float

    def __post_init__(self):
        if not np.isfinite(self.b) or self.b < 1.0:
            raise InvalidParams(f"temptation b must be >= 1, got {self.b}")


def payoff(mine: Strategy, theirs: Strategy, p: PayoffParams) -> float:
    if theirs == Strategy.DEFECT:
        return 0.0
    return 1.0 if mine == Strategy.COOPERATE else float(p.b)


def accumulate_fitness(net: Network, p: PayoffParams) -> None:
    """Overwrite every node's fitness with this generation's round-robin total."""
    kernels.accumulate_fitness(len(net), net._strategy, net._degree, net._nbr, float(p.b), net._fitness)


def update_probability(f_i: float, f_j: float, k_i: int, k_j: int, p: PayoffParams) -> float:
    """Chance that node i copies neighbour j: fitness gap over the largest gap possible."""
    if k_i < 1 or k_j < 1:
        raise DegenerateDegree(f"degrees must be >= 1, got {k_i} and {k_j}")
    if f_i >= f_j:
        return 0.0
    return (f_j - f_i) / (p.b * max(k_i, k_j))


def strategy_update_step(net: Network, p: PayoffParams, rng: RandomSource) -> int:
    """Synchronous update; returns the number of nodes whose strategy changed.

    Rows are visited in birth order. Each node with neighbours spends one draw
    picking a neighbour and, only when that neighbour is strictly fitter, one
    more draw on acceptance. Copies read the strategies as they stood before
    the step.
    """
    scratch = np.empty(len(net), dtype=np.int8)
    return int(
        kernels.update_strategies(
            len(net), net._strategy, net._fitness, net._degree, net._nbr, float(p.b), *bitgen(rng), scratch
        )
    )
