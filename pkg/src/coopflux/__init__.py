"""Cooperation on co-evolving networks with population fluctuation."""

from .analytics import (
    DegreeHistogram,
    SignTestResult,
    ci95,
    degree_histogram,
    last_k_mean,
    pair_by_parameter,
    sign_test,
)
from .engine import (
    DeletionMode,
    FounderSpec,
    GenerationRecord,
    Model,
    RunResult,
    SimParams,
    attachment_weights,
    grow_step,
    run_generation,
    run_simulation,
    truncate_step,
)
from .game import PayoffParams, accumulate_fitness, payoff, strategy_update_step, update_probability
from .genesis import founder_k3, random_network
from .network import AgentState, Network, NodeId, Strategy
from .rng import derive_seed, make_rng

__version__ = "0.1.0"
