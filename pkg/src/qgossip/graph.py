"""
Undirected simple graphs on dense vertex labels ``0..n-1``.

Generators for the ring, the 1D chain, the complete graph and a seeded
random connected graph, plus BFS distances and the structural metrics
(average degree, average path length) used by the LOCC planner.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable

import numpy as np

from .errors import DisconnectedGraph, InvalidParameter

UNREACHABLE = -1


def _norm_edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph.

    Edges are stored as ``(i, j)`` pairs with ``i < j``; the constructor
    accepts either orientation and rejects self-loops, duplicates and
    out-of-range endpoints.
    """

    n: int
    edges: frozenset[tuple[int, int]]

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if int(n) != n or n < 1:
            raise InvalidParameter(f"vertex count must be a positive integer, got {n!r}")
        seen: set[tuple[int, int]] = set()
        for e in edges:
            i, j = int(e[0]), int(e[1])
            if i == j:
                raise InvalidParameter(f"self-loop at pair ({i}, {j})")
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidParameter(f"pair ({i}, {j}) has an endpoint outside 0..{n - 1}")
            key = _norm_edge(i, j)
            if key in seen:
                raise InvalidParameter(f"duplicate edge at pair ({i}, {j})")
            seen.add(key)
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", frozenset(seen))

    def has_edge(self, i: int, j: int) -> bool:
        return _norm_edge(i, j) in self.edges

    def neighbors(self) -> list[list[int]]:
        """Sorted adjacency lists."""
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        for a in adj:
            a.sort()
        return adj

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def to_json(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.sorted_edges()]}

    @classmethod
    def from_json(cls, obj: dict) -> "Graph":
        """Build a graph from ``{"n": int, "edges": [[i, j], ...]}``.

        Pairs must be written with ``i < j``; any violation raises
        :class:`InvalidParameter` naming the offending pair.
        """
        if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
            raise InvalidParameter('graph JSON needs keys "n" and "edges"')
        n = obj["n"]
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise InvalidParameter(f"graph JSON: n must be a positive integer, got {n!r}")
        pairs = []
        for e in obj["edges"]:
            if not isinstance(e, (list, tuple)) or len(e) != 2 or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in e
            ):
                raise InvalidParameter(f"graph JSON: malformed pair {e!r}")
            i, j = e
            if i >= j:
                raise InvalidParameter(f"graph JSON: pair ({i}, {j}) is not written with i < j")
            pairs.append((i, j))
        return cls(n, pairs)


def dumps_graph(g: Graph) -> str:
    return json.dumps(g.to_json())


def loads_graph(text: str) -> Graph:
    return Graph.from_json(json.loads(text))


def gen_ring(n: int) -> Graph:
    if n < 3:
        raise InvalidParameter(f"ring needs n >= 3, got {n}")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def gen_complete(n: int) -> Graph:
    if n < 2:
        raise InvalidParameter(f"complete graph needs n >= 2, got {n}")
    return Graph(n, combinations(range(n), 2))


def gen_chain(n: int) -> Graph:
    if n < 2:
        raise InvalidParameter(f"chain needs n >= 2, got {n}")
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def _prufer_decode(seq: list[int], n: int) -> list[tuple[int, int]]:
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    edges = []
    for v in seq:
        leaf = next(u for u in range(n) if degree[u] == 1)
        edges.append((leaf, v))
        degree[leaf] -= 1
        degree[v] -= 1
    u, w = (x for x in range(n) if degree[x] == 1)
    edges.append((u, w))
    return edges


def gen_random_connected(n: int, p: float, seed: int) -> Graph:
    """Seeded random connected graph.

    A spanning tree is drawn uniformly from all ``n**(n-2)`` labelled trees
    (a uniform Prüfer sequence), then every remaining pair is added
    independently with probability ``p``.
    """
    if n < 2:
        raise InvalidParameter(f"random connected graph needs n >= 2, got {n}")
    if not 0.0 <= p <= 1.0:
        raise InvalidParameter(f"p must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    seq = [int(x) for x in rng.integers(0, n, size=n - 2)]
    tree = {_norm_edge(i, j) for i, j in _prufer_decode(seq, n)}
    edges = set(tree)
    for pair in combinations(range(n), 2):
        if pair in tree:
            continue
        if rng.random() < p:
            edges.add(pair)
    return Graph(n, edges)


def bfs_distances(g: Graph, source: int, adj: list[list[int]] | None = None) -> np.ndarray:
    adj = g.neighbors() if adj is None else adj
    dist = np.full(g.n, UNREACHABLE, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if dist[v] == UNREACHABLE:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def distance_matrix(g: Graph) -> np.ndarray:
    """All-pairs hop distances; unreachable pairs hold ``UNREACHABLE`` (-1)."""
    adj = g.neighbors()
    return np.stack([bfs_distances(g, s, adj) for s in range(g.n)])


def is_connected(g: Graph) -> bool:
    return bool((bfs_distances(g, 0) != UNREACHABLE).all())


def average_degree(g: Graph) -> Fraction:
    return Fraction(2 * len(g.edges), g.n)


def average_path_length(g: Graph) -> Fraction:
    """Mean shortest distance over ordered pairs of distinct vertices."""
    if g.n < 2:
        raise InvalidParameter("average path length needs at least two vertices")
    d = distance_matrix(g)
    if (d == UNREACHABLE).any():
        raise DisconnectedGraph("average path length is undefined on a disconnected graph")
    return Fraction(int(d.sum()), g.n * (g.n - 1))


def diameter(g: Graph) -> int:
    d = distance_matrix(g)
    if (d == UNREACHABLE).any():
        raise DisconnectedGraph("diameter is undefined on a disconnected graph")
    return int(d.max())


def make_graph(family: str, n: int, p: float = 0.0, seed: int = 0) -> Graph:
    if family == "ring":
        return gen_ring(n)
    if family == "complete":
        return gen_complete(n)
    if family == "chain":
        return gen_chain(n)
    if family == "random":
        return gen_random_connected(n, p, seed)
    raise InvalidParameter(f"unknown graph family {family!r}")
