"""The generation loop: play, update, grow, truncate."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import kernels
from .errors import EmptyNetwork, InvalidParams, TooFewTargets
from .game import PayoffParams, accumulate_fitness, strategy_update_step
from .genesis import founder_k3, random_network
from .network import Network, NodeId, Strategy
from .rng import RandomSource, bitgen, make_rng


class Model(str, enum.Enum):
    EPA = "epa"
    FLUCTUATION = "fluctuation"
    STATIC = "static"


class DeletionMode(str, enum.Enum):
    LEAST_FIT = "least_fit"
    RANDOM = "random"


@dataclass(frozen=True)
class FounderSpec:
    """Either a complete triangle of one strategy or a pre-existing random graph."""

    kind: str = "k3"
    strategy: Strategy = Strategy.COOPERATE
    n: int = 1000
    mean_degree: float = 4.0
    coop_probability: float = 0.5

    @classmethod
    def k3(cls, strategy: Strategy) -> "FounderSpec":
        return cls(kind="k3", strategy=Strategy(strategy))

    @classmethod
    def random_graph(cls, n: int, mean_degree: float, coop_probability: float) -> "FounderSpec":
        return cls(kind="random", n=n, mean_degree=mean_degree, coop_probability=coop_probability)

    def __post_init__(self):
        if self.kind not in ("k3", "random"):
            raise InvalidParams(f"unknown founder kind {self.kind!r}")
        if self.kind == "random":
            if self.n < 2:
                raise InvalidParams("random founder needs n >= 2")
            if not 0.0 <= self.coop_probability <= 1.0:
                raise InvalidParams("coop_probability must lie in [0, 1]")

    def build(self, rng: RandomSource) -> Network:
        if self.kind == "k3":
            return founder_k3(self.strategy)
        return random_network(self.n, self.mean_degree, self.coop_probability, rng)

    def label(self) -> str:
        if self.kind == "k3":
            return f"k3-{self.strategy.letter}"
        return f"random-n{self.n}-k{self.mean_degree:g}-p{self.coop_probability:g}"


@dataclass(frozen=True)
class SimParams:
    b: float = 2.0
    epsilon: float = 0.99
    m: int = 2
    nodes_per_generation: int = 10
    n_max: int = 1000
    truncation_percent: float = 2.5
    model: Model = Model.FLUCTUATION
    deletion_mode: DeletionMode = DeletionMode.LEAST_FIT
    generations: int = 2000
    founder: FounderSpec = field(default_factory=lambda: FounderSpec.k3(Strategy.COOPERATE))
    seed: int = 0
    # keep only the component holding the fittest node after truncation
    prune_components: bool = False
    # let nodes added earlier in the same growth step receive edges
    attach_to_newcomers: bool = False

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "deletion_mode", DeletionMode(self.deletion_mode))
        PayoffParams(self.b)
        if not 0.0 <= self.epsilon < 1.0:
            raise InvalidParams(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.m < 1:
            raise InvalidParams("m must be >= 1")
        if self.nodes_per_generation < 0:
            raise InvalidParams("nodes_per_generation cannot be negative")
        if self.n_max < 1:
            raise InvalidParams("n_max must be >= 1")
        if not self.truncation_percent >= 0 or self.truncation_percent > 100:
            raise InvalidParams(f"truncation_percent must lie in [0, 100], got {self.truncation_percent}")
        if self.generations < 1:
            raise InvalidParams("generations must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise InvalidParams("seed must be a non-negative 64-bit integer")

    @property
    def payoff(self) -> PayoffParams:
        return PayoffParams(self.b)

    @property
    def truncates(self) -> bool:
        return self.model is Model.FLUCTUATION and self.truncation_percent > 0

    def with_(self, **changes) -> "SimParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    node_count: int
    edge_count: int
    cooperator_fraction: float
    truncated_this_generation: bool
    nodes_deleted: int


@dataclass
class RunResult:
    params: SimParams
    records: list[GenerationRecord]
    network: Network
    initial_network: Network

    def cooperation(self) -> np.ndarray:
        return np.array([r.cooperator_fraction for r in self.records])

    def node_counts(self) -> np.ndarray:
        return np.array([r.node_count for r in self.records])


def attachment_weights(net: Network, epsilon: float) -> np.ndarray:
    """Probability each node receives a new edge, in row (birth) order."""
    if len(net) == 0:
        raise EmptyNetwork("no nodes to attach to")
    w = (1.0 - epsilon) + epsilon * net.fitnesses
    return w / w.sum()


def grow_step(net: Network, params: SimParams, rng: RandomSource) -> list[NodeId]:
    """Add up to ``nodes_per_generation`` nodes without passing ``n_max``.

    Each new node draws a fair-coin strategy, then ``m`` distinct targets by
    sequential weighted sampling without replacement over the nodes present
    when the step began (see ``attach_to_newcomers``).
    """
    count = max(0, min(params.nodes_per_generation, params.n_max - len(net)))
    if count == 0:
        return []
    if len(net) < params.m:
        # with newcomer targets only the first new node is short of candidates
        raise TooFewTargets(f"need {params.m} attachment targets, network has {len(net)}")
    start = len(net)
    first_birth = net._next_birth
    net.reserve(count, int(net.degrees.max(initial=0)) + count + params.m)
    kernels.grow(
        start, count, params.m, float(params.epsilon), bool(params.attach_to_newcomers),
        net._strategy, net._fitness, net._birth, net._degree, net._nbr,
        first_birth, *bitgen(rng),
    )
    net._n += count
    net._next_birth += count
    net.edge_count += count * params.m
    return list(range(first_birth, first_birth + count))


def deletion_count(truncation_percent: float, size: int) -> int:
    """``X%`` of ``size`` rounded half-up."""
    return int(math.floor(truncation_percent * size / 100.0 + 0.5))


def truncate_step(net: Network, params: SimParams, rng: RandomSource) -> int:
    """Delete the truncation quota, then any node left without neighbours."""
    n = len(net)
    d = min(deletion_count(params.truncation_percent, n), n)
    if d == 0:
        return 0
    if params.deletion_mode is DeletionMode.LEAST_FIT:
        victims = kernels.least_fit_victims(n, net._fitness, d)
    else:
        victims = kernels.random_victims(n, d, *bitgen(rng))
    keep = np.ones(n, dtype=np.bool_)
    keep[victims] = False
    kernels.mark_isolated(n, net._degree, net._nbr, keep)
    if params.prune_components:
        kernels.keep_fittest_component(n, net._fitness, net._degree, net._nbr, keep)
    return net._compact(keep)


def run_generation(net: Network, params: SimParams, rng: RandomSource, gen: int) -> GenerationRecord:
    payoff = params.payoff
    accumulate_fitness(net, payoff)
    strategy_update_step(net, payoff, rng)
    if params.model is not Model.STATIC:
        grow_step(net, params, rng)
    deleted = 0
    truncated = False
    if params.truncates and len(net) >= params.n_max:
        deleted = truncate_step(net, params, rng)
        truncated = True
    return GenerationRecord(
        generation=gen,
        node_count=len(net),
        edge_count=net.edge_count,
        cooperator_fraction=net.cooperator_fraction(),
        truncated_this_generation=truncated,
        nodes_deleted=deleted,
    )


def run_simulation(params: SimParams, rng: Optional[RandomSource] = None) -> RunResult:
    """Build the founder and iterate ``params.generations`` generations (numbered from 1)."""
    rng = make_rng(params.seed) if rng is None else rng
    net = params.founder.build(rng)
    initial = net.copy()
    records = [run_generation(net, params, rng, gen) for gen in range(1, params.generations + 1)]
    return RunResult(params=params, records=records, network=net, initial_network=initial)
