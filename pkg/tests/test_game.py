import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coopflux.errors import DegenerateDegree, InvalidParams
from coopflux.game import PayoffParams, accumulate_fitness, payoff, strategy_update_step, update_probability
from coopflux.network import Network, Strategy
from coopflux.rng import make_rng

C, D = Strategy.COOPERATE, Strategy.DEFECT


def brute_fitness(net, b):
    p = PayoffParams(b)
    out = {}
    for i in net.node_ids():
        mine = net.state(i).strategy
        out[i] = sum(payoff(mine, net.state(j).strategy, p) for j in net.neighbors(i))
    return out


@st.composite
def networks(draw, max_nodes=25):
    n = draw(st.integers(2, max_nodes))
    strategies = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=min(len(pairs), 3 * n)))
    return Network.from_edges(strategies, chosen)


class TestPayoff:
    @pytest.mark.parametrize(
        "mine, theirs, b, expected",
        [(C, C, 1.5, 1.0), (D, C, 1.5, 1.5), (D, D, 1.5, 0.0), (D, D, 3.0, 0.0), (C, D, 1.5, 0.0)],
    )
    def test_weak_pd_matrix(self, mine, theirs, b, expected):
        assert payoff(mine, theirs, PayoffParams(b)) == expected

    def test_b_below_one_rejected(self):
        with pytest.raises(InvalidParams):
            PayoffParams(0.9)


class TestAccumulate:
    def test_cooperator_with_three_cooperators(self):
        net = Network.from_edges([1, 1, 1, 1], [(0, 1), (0, 2), (0, 3)])
        accumulate_fitness(net, PayoffParams(1.5))
        assert net.state(0).fitness == 3.0

    def test_defector_with_mixed_neighbours(self):
        net = Network.from_edges([0, 1, 1, 0], [(0, 1), (0, 2), (0, 3)])
        accumulate_fitness(net, PayoffParams(1.5))
        assert net.state(0).fitness == 3.0

    def test_isolated_node(self):
        net = Network.from_edges([1, 1, 0], [(0, 1)])
        accumulate_fitness(net, PayoffParams(2.0))
        assert net.state(2).fitness == 0.0

    def test_overwrites_previous_generation(self):
        net = Network.from_edges([1, 1], [(0, 1)])
        net.set_fitness(0, 99.0)
        accumulate_fitness(net, PayoffParams(2.0))
        accumulate_fitness(net, PayoffParams(2.0))
        assert net.state(0).fitness == 1.0

    @settings(max_examples=100, deadline=None)
    @given(networks(), st.floats(1.0, 4.0))
    def test_matches_pairwise_sum(self, net, b):
        accumulate_fitness(net, PayoffParams(b))
        expected = brute_fitness(net, b)
        for i in net.node_ids():
            assert net.state(i).fitness == pytest.approx(expected[i], rel=1e-12, abs=0)

    @settings(max_examples=50, deadline=None)
    @given(networks(), st.randoms(use_true_random=False))
    def test_edge_order_irrelevant(self, net, shuffler):
        edges = [(u, v) for u, v in net.edges()]
        shuffler.shuffle(edges)
        edges = [(v, u) if shuffler.random() < 0.5 else (u, v) for u, v in edges]
        other = Network.from_edges(net.strategies.tolist(), edges)
        accumulate_fitness(net, PayoffParams(2.0))
        accumulate_fitness(other, PayoffParams(2.0))
        assert np.array_equal(net.fitnesses, other.fitnesses)

    @settings(max_examples=50, deadline=None)
    @given(networks())
    def test_all_cooperators_total_is_twice_edges(self, net):
        net.strategies[:] = 1
        accumulate_fitness(net, PayoffParams(2.7))
        assert net.fitnesses.sum() == 2 * net.edge_count


class TestUpdateProbability:
    def test_equal_fitness(self):
        assert update_probability(4, 4, 3, 3, PayoffParams(2.0)) == 0.0

    def test_fitter_self(self):
        assert update_probability(5, 2, 3, 3, PayoffParams(2.0)) == 0.0

    def test_direct_evaluation(self):
        # (5 - 2) / (2.5 * max(2, 4))
        assert update_probability(2, 5, 2, 4, PayoffParams(2.5)) == pytest.approx(0.3, abs=1e-15)

    @pytest.mark.parametrize("k_i, k_j", [(1, 1), (2, 5), (3, 3)])
    def test_saturates_at_max_gap(self, k_i, k_j):
        b = 2.2
        assert update_probability(0.0, k_j * b, k_i, k_j, PayoffParams(b)) == pytest.approx(1.0)

    @pytest.mark.parametrize("k_i, k_j", [(0, 1), (1, 0), (0, 0)])
    def test_degree_zero(self, k_i, k_j):
        with pytest.raises(DegenerateDegree):
            update_probability(0.0, 1.0, k_i, k_j, PayoffParams(2.0))

    @settings(max_examples=150, deadline=None)
    @given(networks(), st.floats(1.0, 5.0))
    def test_bounded_on_reachable_states(self, net, b):
        p = PayoffParams(b)
        accumulate_fitness(net, p)
        for i in net.node_ids():
            for j in net.neighbors(i):
                prob = update_probability(
                    net.state(i).fitness, net.state(j).fitness, net.degree(i), net.degree(j), p
                )
                assert 0.0 <= prob <= 1.0


class TestStrategyUpdate:
    def test_uniform_population_is_fixed_point(self):
        net = Network.from_edges([0] * 6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)])
        net.strategies[:] = 1
        rng = make_rng(3)
        for _ in range(20):
            accumulate_fitness(net, PayoffParams(2.0))
            assert strategy_update_step(net, PayoffParams(2.0), rng) == 0

    def test_two_equal_nodes(self):
        net = Network.from_edges([1, 0], [(0, 1)])
        net.set_fitness(0, 1.0)
        net.set_fitness(1, 1.0)
        assert strategy_update_step(net, PayoffParams(2.0), make_rng(0)) == 0

    def test_isolated_nodes_skipped(self):
        net = Network.from_edges([1, 0, 1], [(0, 1)])
        net.set_fitness(1, 5.0)
        rng = make_rng(1)
        for _ in range(50):
            strategy_update_step(net, PayoffParams(2.0), rng)
            assert net.state(2).strategy is C

    def test_star_flip_frequency_matches_update_rule(self):
        # D hub with four C leaves; each leaf also holds a private C pendant.
        k, b = 4, 2.0
        strategies = [0] + [1] * k + [1] * k
        edges = [(0, leaf) for leaf in range(1, k + 1)] + [(leaf, leaf + k) for leaf in range(1, k + 1)]
        net = Network.from_edges(strategies, edges)
        p = PayoffParams(b)
        accumulate_fitness(net, p)
        hub_f, leaf_f = net.state(0).fitness, net.state(1).fitness
        assert (hub_f, leaf_f) == (k * b, 1.0)
        # leaf picks the hub with chance 1/degree, then accepts per the update rule
        expected = update_probability(leaf_f, hub_f, 2, k, p) / 2
        assert expected == pytest.approx(0.4375)

        trials = 100_000
        original = net.strategies.copy()
        flips = np.zeros(k)
        rng = make_rng(2024)
        for _ in range(trials):
            strategy_update_step(net, p, rng)
            flips += net.strategies[1 : k + 1] == 0
            net.strategies[:] = original
        assert np.all(np.abs(flips / trials - expected) <= 0.01)

    def test_synchronous_no_same_generation_relay(self):
        # chain 0(D) - 1(C) - 2(C): 1 may copy 0, 2 copies 1 but must see 1's old strategy
        net = Network.from_edges([0, 1, 1], [(0, 1), (1, 2)])
        p = PayoffParams(2.5)
        rng = make_rng(77)
        relayed = 0
        middle_flips = 0
        for _ in range(4000):
            net.strategies[:] = [0, 1, 1]
            net.set_fitness(0, 2.5)
            net.set_fitness(1, 0.5)
            net.set_fitness(2, 0.0)
            strategy_update_step(net, p, rng)
            middle_flips += net.state(1).strategy is D
            relayed += net.state(2).strategy is D
        assert middle_flips > 300
        assert relayed == 0

    def test_changes_reported(self):
        net = Network.from_edges([0, 1], [(0, 1)])
        net.set_fitness(0, 2.0)
        rng = make_rng(5)
        total = 0
        for _ in range(200):
            net.strategies[:] = [0, 1]
            before = net.strategies.copy()
            changed = strategy_update_step(net, PayoffParams(2.0), rng)
            assert changed == int(np.sum(before != net.strategies))
            total += changed
        assert total > 0
