"""Undirected simple graph with one agent per node.

Nodes live in packed numpy arrays, sorted by birth order, so the compiled
kernels can walk them without any Python objects in the way. A node's
:data:`NodeId` is its birth index: unique within a run and never reused.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from . import kernels
from .errors import DuplicateEdge, NetworkError, SelfEdge, UnknownNode

NodeId = int


class Strategy(enum.IntEnum):
    DEFECT = 0
    COOPERATE = 1

    @property
    def letter(self) -> str:
        return "C" if self is Strategy.COOPERATE else "D"

    @classmethod
    def parse(cls, text: str) -> "Strategy":
        key = text.strip().upper()
        if key in ("C", "COOPERATE"):
            return cls.COOPERATE
        if key in ("D", "DEFECT"):
            return cls.DEFECT
        raise ValueError(f"not a strategy: {text!r}")


@dataclass(frozen=True)
class AgentState:
    strategy: Strategy
    fitness: float
    birth_index: int


class Network:
    """Co-evolving substrate: adjacency plus per-node strategy, fitness and age."""

    def __init__(self, capacity: int = 16, degree_capacity: int = 8):
        capacity = max(int(capacity), 1)
        degree_capacity = max(int(degree_capacity), 1)
        self._n = 0
        self._next_birth = 0
        self.edge_count = 0
        self._strategy = np.zeros(capacity, dtype=np.int8)
        self._fitness = np.zeros(capacity, dtype=np.float64)
        self._birth = np.zeros(capacity, dtype=np.int64)
        self._degree = np.zeros(capacity, dtype=np.int32)
        self._nbr = np.zeros((capacity, degree_capacity), dtype=np.int32)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_edges(cls, strategies: Iterable[int], edges: Iterable[tuple[int, int]]) -> "Network":
        """Build a network whose node ``i`` gets ``strategies[i]``; edges use those positions."""
        strategies = np.asarray(list(strategies), dtype=np.int8)
        pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        n = len(strategies)
        if pairs.size:
            if pairs.min() < 0 or pairs.max() >= n:
                raise UnknownNode("edge endpoint out of range")
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise SelfEdge("self-edge in edge list")
            lo = np.minimum(pairs[:, 0], pairs[:, 1])
            hi = np.maximum(pairs[:, 0], pairs[:, 1])
            if len(np.unique(lo * n + hi)) != len(pairs):
                raise DuplicateEdge("duplicate edge in edge list")
        degree = np.bincount(pairs.ravel(), minlength=n) if pairs.size else np.zeros(n, dtype=np.int64)
        net = cls(capacity=max(n, 16), degree_capacity=max(int(degree.max(initial=0)) * 2, 8))
        net._n = n
        net._next_birth = n
        net._strategy[:n] = strategies
        net._birth[:n] = np.arange(n)
        for a, b in pairs:
            net._link(int(a), int(b))
        net.edge_count = len(pairs)
        return net

    def copy(self) -> "Network":
        other = Network.__new__(Network)
        other._n = self._n
        other._next_birth = self._next_birth
        other.edge_count = self.edge_count
        other._strategy = self._strategy.copy()
        other._fitness = self._fitness.copy()
        other._birth = self._birth.copy()
        other._degree = self._degree.copy()
        other._nbr = self._nbr.copy()
        return other

    # -- capacity ---------------------------------------------------------

    def reserve(self, extra_nodes: int = 0, degree: int = 0) -> None:
        """Make room for ``extra_nodes`` more nodes and rows of width ``degree``."""
        need = self._n + extra_nodes
        cap, dcap = self._nbr.shape
        new_cap = cap
        while new_cap < need:
            new_cap *= 2
        new_dcap = dcap
        while new_dcap < degree:
            new_dcap *= 2
        if new_cap == cap and new_dcap == dcap:
            return
        if new_cap != cap:
            for name in ("_strategy", "_fitness", "_birth", "_degree"):
                old = getattr(self, name)
                grown = np.zeros(new_cap, dtype=old.dtype)
                grown[: self._n] = old[: self._n]
                setattr(self, name, grown)
        nbr = np.zeros((new_cap, new_dcap), dtype=np.int32)
        nbr[: self._n, :dcap] = self._nbr[: self._n]
        self._nbr = nbr

    # -- mutation ---------------------------------------------------------

    def add_node(self, strategy: Strategy) -> NodeId:
        self.reserve(1)
        i = self._n
        self._strategy[i] = int(strategy)
        self._fitness[i] = 0.0
        self._birth[i] = self._next_birth
        self._degree[i] = 0
        self._n += 1
        self._next_birth += 1
        return int(self._birth[i])

    def add_edge(self, a: NodeId, b: NodeId) -> None:
        if a == b:
            raise SelfEdge(f"self-edge on node {a}")
        i, j = self.index_of(a), self.index_of(b)
        if self._has_link(i, j):
            raise DuplicateEdge(f"edge {a}-{b} already present")
        self.reserve(0, max(self._degree[i], self._degree[j]) + 1)
        self._link(i, j)
        self.edge_count += 1

    def remove_nodes(self, ids: Iterable[NodeId]) -> int:
        rows = {self.index_of(node) for node in ids}
        if not rows:
            return 0
        keep = np.ones(self._n, dtype=np.bool_)
        keep[list(rows)] = False
        self._compact(keep)
        return len(rows)

    def _compact(self, keep: np.ndarray) -> int:
        before = self._n
        self._n, self.edge_count = kernels.compact(
            self._n, self._strategy, self._fitness, self._birth, self._degree, self._nbr, keep
        )
        return before - self._n

    def _link(self, i: int, j: int) -> None:
        self._nbr[i, self._degree[i]] = j
        self._degree[i] += 1
        self._nbr[j, self._degree[j]] = i
        self._degree[j] += 1

    def _has_link(self, i: int, j: int) -> bool:
        if self._degree[i] > self._degree[j]:
            i, j = j, i
        return bool(np.any(self._nbr[i, : self._degree[i]] == j))

    def set_strategy(self, node: NodeId, strategy: Strategy) -> None:
        self._strategy[self.index_of(node)] = int(strategy)

    def set_fitness(self, node: NodeId, fitness: float) -> None:
        if fitness < 0:
            raise NetworkError("fitness cannot be negative")
        self._fitness[self.index_of(node)] = fitness

    # -- queries ----------------------------------------------------------

    def __len__(self) -> int:
        return self._n

    def __contains__(self, node: object) -> bool:
        try:
            self.index_of(node)  # type: ignore[arg-type]
        except UnknownNode:
            return False
        return True

    def __iter__(self) -> Iterator[NodeId]:
        return iter(self.node_ids())

    def __repr__(self) -> str:
        return f"<Network {self._n} nodes, {self.edge_count} edges>"

    def index_of(self, node: NodeId) -> int:
        births = self._birth[: self._n]
        i = int(np.searchsorted(births, node))
        if i >= self._n or births[i] != node:
            raise UnknownNode(node)
        return i

    def node_ids(self) -> list[NodeId]:
        return self._birth[: self._n].tolist()

    def neighbors(self, node: NodeId) -> list[NodeId]:
        i = self.index_of(node)
        return self._birth[self._nbr[i, : self._degree[i]]].tolist()

    def degree(self, node: NodeId) -> int:
        return int(self._degree[self.index_of(node)])

    def has_edge(self, a: NodeId, b: NodeId) -> bool:
        return a != b and self._has_link(self.index_of(a), self.index_of(b))

    def state(self, node: NodeId) -> AgentState:
        i = self.index_of(node)
        return AgentState(Strategy(int(self._strategy[i])), float(self._fitness[i]), int(self._birth[i]))

    def isolated_nodes(self) -> set[NodeId]:
        return set(self._birth[: self._n][self._degree[: self._n] == 0].tolist())

    def edges(self) -> Iterator[tuple[NodeId, NodeId]]:
        """Yield each edge once as ``(u, v)`` with ``u < v``, sorted."""
        found = []
        for i in range(self._n):
            for j in self._nbr[i, : self._degree[i]]:
                if i < j:
                    found.append((int(self._birth[i]), int(self._birth[j])))
        found.sort()
        return iter(found)

    # Views over the live rows; row order is birth order.

    @property
    def strategies(self) -> np.ndarray:
        return self._strategy[: self._n]

    @property
    def fitnesses(self) -> np.ndarray:
        return self._fitness[: self._n]

    @property
    def births(self) -> np.ndarray:
        return self._birth[: self._n]

    @property
    def degrees(self) -> np.ndarray:
        return self._degree[: self._n]

    def cooperator_count(self) -> int:
        return int(self._strategy[: self._n].sum())

    def cooperator_fraction(self) -> float:
        return self.cooperator_count() / self._n if self._n else 0.0

    def check(self) -> None:
        """Assert the structural invariants; raises ``NetworkError`` on violation."""
        n = self._n
        if np.any(np.diff(self._birth[:n]) <= 0):
            raise NetworkError("birth order not strictly increasing")
        seen = set()
        for i in range(n):
            row = self._nbr[i, : self._degree[i]]
            if np.any(row < 0) or np.any(row >= n):
                raise NetworkError(f"row {i} points outside the live range")
            if np.any(row == i):
                raise NetworkError(f"self-edge on row {i}")
            if len(set(row.tolist())) != len(row):
                raise NetworkError(f"duplicate edge on row {i}")
            for j in row.tolist():
                if i not in self._nbr[j, : self._degree[j]]:
                    raise NetworkError(f"asymmetric edge {i}-{j}")
                seen.add((min(i, j), max(i, j)))
        if int(self._degree[:n].sum()) != 2 * self.edge_count or len(seen) != self.edge_count:
            raise NetworkError("degree sum does not match edge count")

    # -- snapshot format --------------------------------------------------

    def to_snapshot(self) -> str:
        out = io.StringIO()
        out.write("id,birth_index,strategy,fitness\n")
        for i in range(self._n):
            b = int(self._birth[i])
            out.write(f"{b},{b},{Strategy(int(self._strategy[i])).letter},{float(self._fitness[i])!r}\n")
        out.write("\n")
        for u, v in self.edges():
            out.write(f"{u} {v}\n")
        return out.getvalue()

    @classmethod
    def from_snapshot(cls, text: str) -> "Network":
        head, _, tail = text.partition("\n\n")
        rows = head.strip().splitlines()
        if not rows or rows[0] != "id,birth_index,strategy,fitness":
            raise NetworkError("snapshot is missing its node table header")
        births, strategies, fitness = [], [], []
        for line in rows[1:]:
            node_id, birth, strat, fit = line.split(",")
            if int(node_id) != int(birth):
                raise NetworkError("node id and birth index disagree")
            births.append(int(birth))
            strategies.append(int(Strategy.parse(strat)))
            fitness.append(float(fit))
        position = {b: i for i, b in enumerate(births)}
        edges = []
        for line in tail.strip().splitlines():
            u, v = line.split()
            try:
                edges.append((position[int(u)], position[int(v)]))
            except KeyError as exc:
                raise UnknownNode(exc.args[0]) from None
        net = cls.from_edges(strategies, edges)
        net._birth[: net._n] = births
        net._fitness[: net._n] = fitness
        net._next_birth = max(births, default=-1) + 1
        net.check()
        return net
