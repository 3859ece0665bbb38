"""Topology-based initial matching.

A topology-preserving unit is two node-disjoint p-simplexes of the subgraph
plus the shortest hop path joining them. Candidates in the full graph must
reproduce the unit's edge pattern and have an averaged edge weight within
``tau_c = Phi^-1(1 - alpha/2) * sigma / sqrt(c)`` of the unit's.
"""
from __future__ import annotations

import bisect
import functools
import itertools
import math
from collections import defaultdict
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import AssumptionViolation, TopologyMismatch
from .graph import (
    Edge,
    Graph,
    Path,
    Simplex,
    edge_key,
    enumerate_simplexes,
    path_edges,
    shortest_hop_path,
    simplex_edges,
)
from .rng import make_rng
from .stats import two_sided_critical

COUNT_MODES = ("edges", "nodes")
DEFAULT_TRIES = 30
# auxiliary screens (simplex pre-screens, per-edge orientation screen) run at
# alpha * SCREEN_SHARE so the unit-level averaged test governs coverage
SCREEN_SHARE = 0.1

# absolute slack on summed-weight comparisons: sums of the same weights taken
# in a different order may differ by a few ulps, which matters when sigma = 0
_WINDOW_EPS = 1e-12


@functools.lru_cache(maxsize=64)
def _critical(alpha: float) -> float:
    return two_sided_critical(alpha)


@dataclass(frozen=True)
class ThresholdConfig:
    """Feasibility threshold parameters.

    ``count_mode="edges"`` averages over matched edge pairs (the divisor the
    coverage guarantee needs); ``"nodes"`` divides by the node count instead.
    """

    sigma: float
    alpha: float = 0.025
    p: int = 2
    count_mode: str = "edges"

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and non-negative, got {self.sigma}")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.count_mode not in COUNT_MODES:
            raise ValueError(f"count_mode must be one of {COUNT_MODES}")

    def threshold(self, c: int) -> float:
        return threshold(c, self)

    def replace(self, **changes) -> ThresholdConfig:
        return ThresholdConfig(**{**self.__dict__, **changes})


def threshold(c: int, cfg: ThresholdConfig) -> float:
    if c < 1:
        raise ValueError("c must be >= 1")
    if cfg.sigma == 0:
        return 0.0
    return _critical(cfg.alpha) * cfg.sigma / math.sqrt(c)


class MatchingPolicy(Mapping):
    """Injective map from subgraph node ids to full-graph node ids."""

    __slots__ = ("_map", "_key")

    def __init__(self, assignment: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = dict(assignment)
        if len(set(items.values())) != len(items):
            raise ValueError("matching policy must be injective")
        self._map = items
        self._key = tuple(sorted(items.items()))

    def __getitem__(self, v):
        return self._map[v]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)

    def __hash__(self):
        return hash(self._key)

    def __eq__(self, other):
        if isinstance(other, MatchingPolicy):
            return self._key == other._key
        if isinstance(other, Mapping):
            return dict(self._key) == dict(other)
        return NotImplemented

    def __repr__(self):
        return f"MatchingPolicy({dict(self._key)})"

    def pairs(self) -> tuple[tuple[int, int], ...]:
        return self._key

    def extended(self, pairs: Iterable[tuple[int, int]]) -> MatchingPolicy:
        return MatchingPolicy({**self._map, **dict(pairs)})

    def is_consistent(self, g_s: Graph, g_f: Graph) -> bool:
        """Every subgraph edge inside the domain maps onto a full-graph edge."""
        for u, v in g_s.edges:
            if u in self._map and v in self._map and not g_f.has_edge(self._map[u], self._map[v]):
                return False
        return True


def is_topology_consistent(policy: Mapping[int, int], g_s: Graph, g_f: Graph) -> bool:
    if len(set(policy.values())) != len(policy):
        return False
    return all(
        g_f.has_edge(policy[u], policy[v]) for u, v in g_s.edges if u in policy and v in policy
    )


@dataclass(frozen=True)
class TopologyUnit:
    simplex_a: Simplex
    simplex_b: Simplex
    path: Path

    def __post_init__(self):
        if set(self.simplex_a) & set(self.simplex_b):
            raise ValueError("unit simplexes must be node-disjoint")
        if self.path[0] not in self.simplex_a or self.path[-1] not in self.simplex_b:
            raise ValueError("path must run from simplex_a to simplex_b")

    @functools.cached_property
    def node_set(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.simplex_a) | set(self.simplex_b) | set(self.path)))

    @functools.cached_property
    def edge_set(self) -> tuple[Edge, ...]:
        edges = set(simplex_edges(self.simplex_a)) | set(simplex_edges(self.simplex_b))
        edges |= set(path_edges(self.path))
        return tuple(sorted(edges))

    @property
    def c(self) -> int:
        return len(self.node_set)

    @property
    def hops(self) -> int:
        return len(self.path) - 1

    def count(self, mode: str) -> int:
        return self.c if mode == "nodes" else len(self.edge_set)

    def describe(self) -> dict:
        return {
            "simplex_a": list(self.simplex_a),
            "simplex_b": list(self.simplex_b),
            "path": list(self.path),
            "nodes": self.c,
            "edges": len(self.edge_set),
        }


@dataclass
class FeasibleSet:
    unit: TopologyUnit | None
    candidates: list[MatchingPolicy]
    tries: int = 0
    diagnostics: list[dict] = field(default_factory=list)

    def __len__(self):
        return len(self.candidates)

    def __bool__(self):
        return bool(self.candidates)


def build_unit(g_s: Graph, simplex_a: Simplex, simplex_b: Simplex) -> TopologyUnit:
    path = shortest_hop_path(g_s, simplex_a, simplex_b)
    return TopologyUnit(tuple(simplex_a), tuple(simplex_b), path)


def _divisor(edges: Sequence[Edge], count_mode: str) -> int:
    if count_mode == "nodes":
        return len({v for e in edges for v in e})
    return len(edges)


def mean_edge_weight(g: Graph, edge_set: Iterable[Edge], count_mode: str = "edges") -> float:
    """Summed weight of ``edge_set`` divided by its edge or node count."""
    edges = [edge_key(*e) for e in edge_set]
    if not edges:
        raise ValueError("edge set is empty")
    return sum(g.weight(u, v) for u, v in edges) / _divisor(edges, count_mode)


def unit_distance(
    g_s: Graph,
    sub_edges: Iterable[Edge],
    g_f: Graph,
    assignment: Mapping[int, int],
    count_mode: str = "edges",
) -> float:
    """``|mean(sub) - mean(candidate)|`` where the candidate is the image of
    ``sub_edges`` under ``assignment``."""
    sub_edges = [edge_key(*e) for e in sub_edges]
    images = []
    for u, v in sub_edges:
        a, b = assignment[u], assignment[v]
        if not g_f.has_edge(a, b):
            raise TopologyMismatch(f"sub edge ({u}, {v}) maps to non-edge ({a}, {b})")
        images.append(edge_key(a, b))
    return abs(mean_edge_weight(g_s, sub_edges, count_mode) - mean_edge_weight(g_f, images, count_mode))


# -- simplex level ---------------------------------------------------------

def _simplex_index(g: Graph, p: int) -> tuple[list[float], list[Simplex]]:
    def build():
        scored = sorted(
            (sum(g.weight(u, v) for u, v in simplex_edges(s)), s) for s in enumerate_simplexes(g, p)
        )
        return [s for s, _ in scored], [x for _, x in scored]

    return g.cached(("simplex_sums", p), build)


def _simplex_sum(g: Graph, simplex: Sequence[int]) -> float:
    return sum(g.weight(u, v) for u, v in simplex_edges(simplex))


def _simplex_divisor(p: int, count_mode: str) -> int:
    return p + 1 if count_mode == "nodes" else (p + 1) * p // 2


def feasible_cliques(g_f: Graph, g_s: Graph, sub_simplex: Simplex, cfg: ThresholdConfig) -> list[Simplex]:
    """Cliques of ``g_f`` whose averaged weight is within threshold of ``sub_simplex``."""
    p = len(sub_simplex) - 1
    div = _simplex_divisor(p, cfg.count_mode)
    tau = threshold(div, cfg)
    target = _simplex_sum(g_s, sub_simplex)
    sums, simplexes = _simplex_index(g_f, p)
    lo = bisect.bisect_left(sums, target - div * tau - _WINDOW_EPS)
    hi = bisect.bisect_right(sums, target + div * tau + _WINDOW_EPS)
    out = [simplexes[i] for i in range(lo, hi) if abs(target - sums[i]) <= div * tau + _WINDOW_EPS]
    out.sort()
    return out


def edge_limit(n_edges: int, cfg: ThresholdConfig) -> float:
    """Per-edge difference bound for a family of ``n_edges`` matched edges.

    ``threshold(1)`` at the Bonferroni level ``alpha * SCREEN_SHARE / n_edges``,
    so the true bijection clears it on every edge with probability at least
    ``1 - alpha * SCREEN_SHARE``.
    """
    return threshold(1, cfg.replace(alpha=cfg.alpha * SCREEN_SHARE / max(1, n_edges)))


def _rank(
    g_s: Graph, g_f: Graph, edges: Sequence[Edge], maps: Iterable[dict[int, int]], cfg: ThresholdConfig
) -> list[MatchingPolicy]:
    limit = edge_limit(len(edges), cfg)
    scored = []
    for m in maps:
        diffs = [abs(g_s.weight(u, v) - g_f.weight(m[u], m[v])) for u, v in edges]
        if max(diffs) <= limit:
            policy = MatchingPolicy(m)
            scored.append((sum(diffs), policy.pairs(), policy))
    scored.sort(key=lambda t: (t[0], t[1]))
    return [t[2] for t in scored]


def simplex_orientations(
    g_s: Graph, sub_simplex: Simplex, g_f: Graph, full_simplex: Simplex, cfg: ThresholdConfig
) -> list[MatchingPolicy]:
    """Vertex bijections between two cliques, best first, per-edge pruned."""
    maps = (dict(zip(sub_simplex, perm)) for perm in itertools.permutations(full_simplex))
    return _rank(g_s, g_f, simplex_edges(sub_simplex), maps, cfg)


def feasible_simplex_matches(
    g_f: Graph, g_s: Graph, sub_simplex: Simplex, cfg: ThresholdConfig
) -> list[tuple[Simplex, list[MatchingPolicy]]]:
    return [
        (s, simplex_orientations(g_s, sub_simplex, g_f, s, cfg))
        for s in feasible_cliques(g_f, g_s, sub_simplex, cfg)
    ]


def resolve_orientation(
    g_s: Graph, sub_unit: TopologyUnit, g_f: Graph, cand_unit: TopologyUnit, cfg: ThresholdConfig
) -> list[MatchingPolicy]:
    """Node bijections from ``sub_unit`` onto ``cand_unit`` that keep the edge
    pattern, ranked by summed per-edge weight difference.

    The connecting paths map position by position, which pins the attachment
    vertex of each simplex; the free simplex vertices are permuted. Any
    bijection with a single edge differing by more than :func:`edge_limit` is
    dropped.
    """
    if sub_unit.hops != cand_unit.hops or len(sub_unit.simplex_a) != len(cand_unit.simplex_a):
        return []
    fixed = dict(zip(sub_unit.path, cand_unit.path))
    free_a = [x for x in sub_unit.simplex_a if x != sub_unit.path[0]]
    free_b = [x for x in sub_unit.simplex_b if x != sub_unit.path[-1]]
    img_a = [x for x in cand_unit.simplex_a if x != cand_unit.path[0]]
    img_b = [x for x in cand_unit.simplex_b if x != cand_unit.path[-1]]

    def maps() -> Iterator[dict[int, int]]:
        for pa in itertools.permutations(img_a):
            for pb in itertools.permutations(img_b):
                m = dict(fixed)
                m.update(zip(free_a, pa))
                m.update(zip(free_b, pb))
                yield m

    return _rank(g_s, g_f, sub_unit.edge_set, maps(), cfg)


# -- unit level ------------------------------------------------------------

def _paths_from(
    g_f: Graph, start: int, hops: int, forbid: frozenset[int], budget: float | None
) -> Iterator[tuple[Path, float]]:
    """Simple paths of exactly ``hops`` edges from ``start`` avoiding ``forbid``.

    With non-negative weights, ``budget`` bounds the path weight sum.
    """
    path = [start]
    on_path = {start}

    def walk(u: int, left: int, acc: float):
        if left == 0:
            yield tuple(path), acc
            return
        for x in g_f.sorted_neighbors(u):
            if x in on_path or x in forbid:
                continue
            nxt = acc + g_f.weight(u, x)
            if budget is not None and nxt > budget:
                continue
            path.append(x)
            on_path.add(x)
            yield from walk(x, left - 1, nxt)
            on_path.discard(x)
            path.pop()

    yield from walk(start, hops, 0.0)


def _min_weight(g: Graph) -> float:
    return g.cached(("min_weight",), lambda: min((w for *_, w in g.edge_items()), default=0.0))


def match_unit(g_s: Graph, g_f: Graph, unit: TopologyUnit, cfg: ThresholdConfig) -> list[MatchingPolicy]:
    """All feasible, topology-consistent placements of ``unit`` in ``g_f``."""
    div = unit.count(cfg.count_mode)
    tau = threshold(div, cfg)
    sub_sum = sum(g_s.weight(u, v) for u, v in unit.edge_set)
    lo = sub_sum - div * tau - _WINDOW_EPS
    hi = sub_sum + div * tau + _WINDOW_EPS

    screen = cfg.replace(alpha=cfg.alpha * SCREEN_SHARE)
    cand_a = feasible_cliques(g_f, g_s, unit.simplex_a, screen)
    cand_b = feasible_cliques(g_f, g_s, unit.simplex_b, screen)
    if not cand_a or not cand_b:
        return []
    sums = {s: _simplex_sum(g_f, s) for s in set(cand_a) | set(cand_b)}
    by_node: dict[int, list[Simplex]] = defaultdict(list)
    for s in cand_b:
        for v in s:
            by_node[v].append(s)
    min_b = min(sums[s] for s in cand_b)
    nonneg = _min_weight(g_f) >= 0

    unit_nodes = set(unit.node_set)
    inner_edges = [(u, v) for u, v in g_s.edges if u in unit_nodes and v in unit_nodes]
    out: list[MatchingPolicy] = []
    seen: set[MatchingPolicy] = set()
    for a in cand_a:
        forbid = frozenset(a)
        budget = hi - sums[a] - min_b if nonneg else None
        for u in a:
            for path, path_sum in _paths_from(g_f, u, unit.hops, forbid, budget):
                inner = set(path[1:-1])
                for b in by_node.get(path[-1], ()):
                    if forbid & set(b) or inner & set(b):
                        continue
                    total = sums[a] + sums[b] + path_sum
                    if not lo <= total <= hi:
                        continue
                    cand = TopologyUnit(a, b, path)
                    for policy in resolve_orientation(g_s, unit, g_f, cand, cfg):
                        if policy in seen:
                            continue
                        if all(g_f.has_edge(policy[x], policy[y]) for x, y in inner_edges):
                            seen.add(policy)
                            out.append(policy)
    return out


def disjoint_simplex_pairs(simplexes: Sequence[Simplex]) -> list[tuple[Simplex, Simplex]]:
    return [
        (a, b)
        for a, b in itertools.combinations(simplexes, 2)
        if not set(a) & set(b)
    ]


def check_assumptions(g_s: Graph, p: int = 2) -> list[tuple[Simplex, Simplex]]:
    """Raise :class:`AssumptionViolation` unless ``g_s`` can host a unit;
    return the usable simplex pairs."""
    if g_s.node_count == 0 or not g_s.is_connected():
        raise AssumptionViolation("subgraph is not connected")
    simplexes = enumerate_simplexes(g_s, p)
    if len(simplexes) < 2:
        raise AssumptionViolation(f"subgraph has {len(simplexes)} {p}-simplexes, need at least 2")
    pairs = disjoint_simplex_pairs(simplexes)
    if not pairs:
        raise AssumptionViolation(f"no two node-disjoint {p}-simplexes in subgraph")
    return pairs


def topology_match(
    g_s: Graph,
    g_f: Graph,
    cfg: ThresholdConfig,
    n_tries: int = DEFAULT_TRIES,
    rng_seed: int = 0,
) -> FeasibleSet:
    """Draw simplex pairs without replacement until one unit has feasible
    placements in ``g_f``; return that unit with all of them."""
    if n_tries < 1:
        raise ValueError("n_tries must be >= 1")
    pairs = check_assumptions(g_s, cfg.p)
    rng: np.random.Generator = make_rng(rng_seed, 0)
    order = rng.permutation(len(pairs))[:n_tries]
    log = []
    for attempt, idx in enumerate(order, start=1):
        a, b = pairs[int(idx)]
        unit = build_unit(g_s, a, b)
        policies = match_unit(g_s, g_f, unit, cfg)
        log.append({"unit": unit.describe(), "feasible": len(policies)})
        if policies:
            return FeasibleSet(unit, policies, attempt, log)
    return FeasibleSet(None, [], len(order), log)
