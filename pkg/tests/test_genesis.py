import itertools

import numpy as np
import pytest
from scipy.stats import binom

from coopflux.errors import InvalidParams, TooManyEdges
from coopflux.genesis import _decode_pairs, edge_target, founder_k3, random_network
from coopflux.network import Strategy
from coopflux.rng import make_rng


@pytest.mark.parametrize("strategy", [Strategy.COOPERATE, Strategy.DEFECT])
def test_k3(strategy):
    net = founder_k3(strategy)
    assert len(net) == 3 and net.edge_count == 3
    assert list(net.degrees) == [2, 2, 2]
    assert all(net.state(i).strategy is strategy for i in net.node_ids())
    assert list(net.births) == [0, 1, 2]


def test_edge_target_rounds_half_up():
    assert edge_target(1000, 4) == 2000
    assert edge_target(5, 1) == 3
    assert edge_target(7, 3) == 11


def test_exact_edge_count():
    net = random_network(1000, 4, 0.5, make_rng(0))
    assert net.edge_count == 2000
    assert net.degrees.mean() == 4.0
    net.check()


@pytest.mark.parametrize("p, expected", [(0.0, 0), (1.0, 300)])
def test_extreme_coop_probability(p, expected):
    assert random_network(300, 4, p, make_rng(1)).cooperator_count() == expected


def test_complete_graph_allowed_and_overflow_rejected():
    assert random_network(6, 5, 0.5, make_rng(2)).edge_count == 15
    with pytest.raises(TooManyEdges):
        random_network(6, 6, 0.5, make_rng(2))


@pytest.mark.parametrize("args", [(0, 4, 0.5), (10, -1, 0.5), (10, 4, 1.5)])
def test_invalid_arguments(args):
    with pytest.raises(InvalidParams):
        random_network(*args, make_rng(0))


@pytest.mark.parametrize("n", [2, 3, 7, 50])
def test_decode_pairs_enumerates_upper_triangle(n):
    expected = list(itertools.combinations(range(n), 2))
    got = _decode_pairs(np.arange(len(expected)), n)
    assert [tuple(map(int, row)) for row in got] == expected


def test_decode_pairs_large_n_boundaries():
    n = 100_000
    rows = np.array([0, 1, 5000, 99_998])
    starts = rows * n - rows * (rows + 1) // 2
    index = np.concatenate([starts, starts + (n - 2 - rows)])
    got = _decode_pairs(index, n)
    assert np.array_equal(got[:4, 0], rows) and np.array_equal(got[:4, 1], rows + 1)
    assert np.array_equal(got[4:, 0], rows) and np.all(got[4:, 1] == n - 1)


def test_pairs_are_uniform():
    # every one of the 10 pairs on 5 nodes appears with probability 3/10
    rng = make_rng(3)
    trials = 20_000
    hits = dict.fromkeys(itertools.combinations(range(5), 2), 0)
    for _ in range(trials):
        for e in random_network(5, 1.2, 0.5, rng).edges():
            hits[e] += 1
    for count in hits.values():
        assert count / trials == pytest.approx(0.3, abs=0.015)


def test_degree_mean_and_spread():
    rng = make_rng(4)
    means, pooled = [], []
    for _ in range(25):
        net = random_network(1000, 4, 0.5, rng)
        means.append(net.degrees.mean())
        pooled.append(net.degrees)
    assert abs(np.mean(means) - 4) <= 0.1
    degrees = np.concatenate(pooled)
    # close to Poisson: variance near the mean
    assert abs(degrees.var() - 4) < 0.3


def test_max_degree_tail_matches_binomial():
    """P(max degree >= 15) for G(1000, 2000) against a binomial per-node tail."""
    rng = make_rng(5)
    nets = 1500
    hits = sum(int(random_network(1000, 4, 0, rng).degrees.max() >= 15) for _ in range(nets))
    per_node = binom.sf(14, 999, 4 / 999)
    expected = 1 - (1 - per_node) ** 1000
    sd = np.sqrt(expected * (1 - expected) / nets)
    assert abs(hits / nets - expected) < 4 * sd


def test_cooperator_fraction_within_three_sigma():
    n, p = 2000, 0.3
    frac = random_network(n, 4, p, make_rng(6)).cooperator_fraction()
    assert abs(frac - p) <= 3 * np.sqrt(p * (1 - p) / n)


def test_isolated_nodes_kept():
    net = random_network(200, 0.5, 0.5, make_rng(7))
    assert net.isolated_nodes()
    assert len(net) == 200
