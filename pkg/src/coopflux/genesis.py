"""Founder networks: the complete triangle and fixed-edge-count random graphs."""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidParams, TooManyEdges
from .network import Network, Strategy
from .rng import RandomSource


def founder_k3(strategy: Strategy) -> Network:
    s = int(strategy)
    return Network.from_edges([s, s, s], [(0, 1), (1, 2), (0, 2)])


def edge_target(n: int, mean_degree: float) -> int:
    """``n * k / 2`` rounded half-up."""
    return int(math.floor(n * mean_degree / 2.0 + 0.5))


def random_network(n: int, mean_degree: float, coop_probability: float, rng: RandomSource) -> Network:
    """G(n, M) graph with M = round(n*k/2) and Bernoulli(coop_probability) cooperators.

    Strategies are drawn first (one uniform per node), then the M pairs.
    Connectivity is not enforced; isolated nodes stay.
    """
    if n < 2:
        raise InvalidParams("random network needs at least 2 nodes")
    if not 0.0 <= coop_probability <= 1.0:
        raise InvalidParams(f"coop_probability must lie in [0, 1], got {coop_probability}")
    if mean_degree < 0:
        raise InvalidParams("mean degree cannot be negative")
    n_edges = edge_target(n, mean_degree)
    n_pairs = n * (n - 1) // 2
    if n_edges > n_pairs:
        raise TooManyEdges(f"{n_edges} edges requested but only {n_pairs} pairs exist")

    strategies = (rng.random(n) < coop_probability).astype(np.int8)
    picks = np.sort(rng.choice(n_pairs, size=n_edges, replace=False))
    return Network.from_edges(strategies, _decode_pairs(picks, n))


def _decode_pairs(index: np.ndarray, n: int) -> np.ndarray:
    """Map row-major indices over the strict upper triangle to ``(i, j)``, ``i < j``."""
    index = np.asarray(index, dtype=np.int64)
    # row i starts at offset i*n - i*(i+1)/2
    i = np.floor((2 * n - 1 - np.sqrt((2 * n - 1) ** 2 - 8.0 * index)) / 2).astype(np.int64)
    start = i * n - i * (i + 1) // 2
    # patch float error at row boundaries
    low = index < start
    i[low] -= 1
    start = i * n - i * (i + 1) // 2
    high = index >= start + (n - 1 - i)
    i[high] += 1
    start = i * n - i * (i + 1) // 2
    j = index - start + i + 1
    return np.stack([i, j], axis=1)
