"""Immutable undirected weighted graphs, clique (simplex) listing and hop-count paths.

Nodes are dense integer ids ``0 .. node_count - 1``. Simplexes and paths are
plain tuples: a simplex is a sorted tuple of ``p + 1`` node ids, a path is the
ordered tuple of visited nodes.
"""
from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Iterator, Sequence

from .errors import (
    DuplicateEdgeError,
    GraphError,
    NonFiniteWeightError,
    NoPathError,
    PathLimitError,
    SelfLoopError,
)

Edge = tuple[int, int]
Simplex = tuple[int, ...]
Path = tuple[int, ...]

DEFAULT_PATH_CAP = 10**6


def edge_key(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Frozen weighted graph. Build it with :func:`build_graph`."""

    __slots__ = ("_n", "_adj", "_w", "_cache")

    def __init__(self, node_count: int, weights: dict[Edge, float]):
        adj: list[set[int]] = [set() for _ in range(node_count)]
        for u, v in weights:
            adj[u].add(v)
            adj[v].add(u)
        self._n = node_count
        self._adj = tuple(frozenset(a) for a in adj)
        self._w = dict(sorted(weights.items()))
        self._cache: dict = {}

    def __setattr__(self, name, value):
        if hasattr(self, "_cache"):
            raise AttributeError("Graph is immutable")
        object.__setattr__(self, name, value)

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return len(self._w)

    @property
    def edges(self) -> tuple[Edge, ...]:
        """Edges as sorted ``(u, v)`` pairs with ``u < v``, in ascending order."""
        return tuple(self._w)

    def nodes(self) -> range:
        return range(self._n)

    def weight(self, u: int, v: int) -> float:
        return self._w[edge_key(u, v)]

    def weights(self) -> dict[Edge, float]:
        return dict(self._w)

    def edge_items(self) -> Iterator[tuple[int, int, float]]:
        for (u, v), w in self._w.items():
            yield u, v, w

    def has_edge(self, u: int, v: int) -> bool:
        return 0 <= u < self._n and v in self._adj[u]

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def sorted_neighbors(self, v: int) -> tuple[int, ...]:
        key = ("sorted_nbrs",)
        table = self._cache.get(key)
        if table is None:
            table = tuple(tuple(sorted(a)) for a in self._adj)
            self._cache[key] = table
        return table[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def is_connected(self) -> bool:
        if self._n == 0:
            return True
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for x in self._adj[u]:
                if x not in seen:
                    seen.add(x)
                    queue.append(x)
        return len(seen) == self._n

    def induced(self, nodes: Sequence[int]) -> Graph:
        """Induced subgraph relabelled so that ``nodes[i]`` becomes ``i``."""
        index = {v: i for i, v in enumerate(nodes)}
        weights = {}
        for v in nodes:
            for x in self._adj[v]:
                if x in index and index[v] < index[x]:
                    weights[(index[v], index[x])] = self.weight(v, x)
        return Graph(len(nodes), weights)

    def with_weights(self, weights: dict[Edge, float]) -> Graph:
        """Same topology, new weights (keys must equal the edge set)."""
        if set(weights) != set(self._w):
            raise GraphError("weight keys must equal the edge set")
        _check_finite(weights.values())
        return Graph(self._n, weights)

    def cached(self, key, factory):
        """Memoise a derived, read-only index (e.g. simplex lists) on the graph."""
        try:
            return self._cache[key]
        except KeyError:
            value = factory()
            self._cache[key] = value
            return value

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and self._w == other._w

    def __hash__(self):
        return hash((self._n, tuple(self._w.items())))

    def __repr__(self):
        return f"Graph(node_count={self._n}, edge_count={len(self._w)})"


def _check_finite(values: Iterable[float]) -> None:
    for w in values:
        if not math.isfinite(w):
            raise NonFiniteWeightError(f"non-finite weight {w!r}")


def build_graph(edge_triples: Iterable[tuple[int, int, float]], node_count: int | None = None) -> Graph:
    """Build a :class:`Graph` from ``(u, v, weight)`` triples.

    ``node_count`` defaults to ``1 + max id``; pass it explicitly to keep
    trailing isolated nodes.
    """
    weights: dict[Edge, float] = {}
    max_id = -1
    for u, v, w in edge_triples:
        u, v, w = int(u), int(v), float(w)
        if u < 0 or v < 0:
            raise GraphError(f"negative node id in edge ({u}, {v})")
        if u == v:
            raise SelfLoopError(f"self-loop on node {u}")
        if not math.isfinite(w):
            raise NonFiniteWeightError(f"non-finite weight {w!r} on edge ({u}, {v})")
        key = edge_key(u, v)
        if key in weights:
            raise DuplicateEdgeError(f"edge {key} given more than once")
        weights[key] = w
        max_id = max(max_id, u, v)
    n = max_id + 1
    if node_count is not None:
        if node_count < n:
            raise GraphError(f"node_count {node_count} smaller than max id + 1 = {n}")
        n = node_count
    return Graph(n, weights)


def enumerate_simplexes(g: Graph, p: int) -> list[Simplex]:
    """All ``(p + 1)``-cliques of ``g`` as sorted tuples, in ascending order.

    Edges are oriented from lower to higher (degree, id) rank and cliques are
    grown by intersecting forward neighbourhoods, so each clique is reached
    exactly once from its lowest-ranked member.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    return list(g.cached(("simplexes", p), lambda: _list_cliques(g, p + 1)))


def _list_cliques(g: Graph, k: int) -> tuple[Simplex, ...]:
    rank = {v: (g.degree(v), v) for v in g.nodes()}
    forward = [frozenset(x for x in g.neighbors(v) if rank[x] > rank[v]) for v in g.nodes()]
    out: list[Simplex] = []

    def grow(clique: list[int], candidates: frozenset[int]) -> None:
        if len(clique) == k:
            out.append(tuple(sorted(clique)))
            return
        need = k - len(clique)
        if len(candidates) < need:
            return
        for x in candidates:
            clique.append(x)
            grow(clique, candidates & forward[x])
            clique.pop()

    for v in g.nodes():
        grow([v], forward[v])
    out.sort()
    return tuple(out)


def hop_distances(g: Graph, sources: Iterable[int]) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for x in g.neighbors(u):
            if x not in dist:
                dist[x] = du
                queue.append(x)
    return dist


def shortest_hop_path(g: Graph, sources: Iterable[int], targets: Iterable[int]) -> Path:
    """Minimum-hop path from any source to any target.

    Among all minimum-hop paths the lexicographically smallest node sequence
    is returned.
    """
    sources = set(sources)
    targets = set(targets)
    if not sources or not targets:
        raise ValueError("sources and targets must be non-empty")
    if sources & targets:
        raise ValueError("sources and targets must be disjoint")
    to_target = hop_distances(g, targets)
    reachable = [s for s in sources if s in to_target]
    if not reachable:
        raise NoPathError("no path between the node sets")
    hops = min(to_target[s] for s in reachable)
    node = min(s for s in reachable if to_target[s] == hops)
    path = [node]
    while to_target[node] > 0:
        step = to_target[node] - 1
        node = min(x for x in g.neighbors(node) if to_target.get(x) == step)
        path.append(node)
    return tuple(path)


def paths_with_hops(
    g: Graph, start: int, end: int, hops: int, cap: int = DEFAULT_PATH_CAP
) -> list[Path]:
    """All simple paths from ``start`` to ``end`` with exactly ``hops`` edges.

    Paths are produced in lexicographic order. Raises :class:`PathLimitError`
    when more than ``cap`` paths would be emitted.
    """
    if hops < 0:
        raise ValueError("hops must be non-negative")
    if start == end:
        return [(start,)] if hops == 0 else []
    to_end = hop_distances(g, [end])
    if to_end.get(start, hops + 1) > hops:
        return []
    out: list[Path] = []
    path = [start]
    on_path = {start}

    def walk(u: int, left: int) -> None:
        if left == 0:
            if u == end:
                if len(out) >= cap:
                    raise PathLimitError(f"more than {cap} paths")
                out.append(tuple(path))
            return
        for x in g.sorted_neighbors(u):
            if x in on_path or to_end.get(x, left) > left - 1:
                continue
            if x == end and left != 1:
                continue
            path.append(x)
            on_path.add(x)
            walk(x, left - 1)
            on_path.discard(x)
            path.pop()

    walk(start, hops)
    return out


def path_edges(path: Sequence[int]) -> list[Edge]:
    return [edge_key(a, b) for a, b in zip(path, path[1:])]


def simplex_edges(simplex: Sequence[int]) -> list[Edge]:
    s = sorted(simplex)
    return [(s[i], s[j]) for i in range(len(s)) for j in range(i + 1, len(s))]
