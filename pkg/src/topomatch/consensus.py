"""Consensus-based expansion of an initial unit match.

Starting from a matched unit, paths that leave the matched region are grown
one hop at a time; a path is accepted only when exactly one counterpart in
the full graph is feasible. Expansion stops once no boundary edge can yield
a new match.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .graph import Edge, Graph, Path
from .matching import FeasibleSet, MatchingPolicy, ThresholdConfig, threshold
from .rng import make_rng

DEFAULT_MAX_HOPS = 3


@dataclass(frozen=True)
class PathCandidate:
    sub_path: Path
    full_path: Path
    diffs: tuple[float, ...]

    @property
    def hops(self) -> int:
        return len(self.diffs)

    @property
    def residual(self) -> float:
        """Distance between the averaged edge weights of the two paths."""
        return abs(sum(self.diffs)) / len(self.diffs)


@dataclass
class ExpansionStep:
    anchor_edge: Edge
    sub_path: Path
    full_path: Path
    hops: int
    residual: float
    threshold: float
    feasible_sizes: list[int]

    def to_dict(self) -> dict:
        return {
            "anchor_edge": list(self.anchor_edge),
            "sub_path": list(self.sub_path),
            "full_path": list(self.full_path),
            "hops": self.hops,
            "residual": self.residual,
            "threshold": self.threshold,
            "feasible_sizes": list(self.feasible_sizes),
        }


@dataclass
class Expansion:
    initial: MatchingPolicy
    policy: MatchingPolicy
    steps: list[ExpansionStep] = field(default_factory=list)
    exhausted: list[Edge] = field(default_factory=list)
    total_residual: float = 0.0

    @property
    def matched(self) -> int:
        return len(self.policy)


@dataclass
class ConsensusResult:
    policy: MatchingPolicy
    best: Expansion | None
    expansions: list[Expansion]

    @property
    def steps(self) -> list[ExpansionStep]:
        return self.best.steps if self.best else []


# (full_path, diffs, signed_sum)
_Partial = tuple[Path, tuple[float, ...], float]


def _extend(
    g_s: Graph,
    g_f: Graph,
    sub_path: Path,
    partials: list[_Partial],
    matched: Mapping[int, int],
    used: set[int],
) -> list[_Partial]:
    """Topology-consistent one-hop extensions of ``partials`` for ``sub_path``."""
    prev, new = sub_path[-2], sub_path[-1]
    w_sub = g_s.weight(prev, new)
    nbrs = g_s.neighbors(new)
    anchored = [matched[m] for m in nbrs if m in matched and m != prev]
    back = [j for j in range(1, len(sub_path) - 2) if sub_path[j] in nbrs]
    out = []
    for full, diffs, total in partials:
        last = full[-1]
        for x in g_f.sorted_neighbors(last):
            if x in used or x in full:
                continue
            if any(not g_f.has_edge(x, y) for y in anchored):
                continue
            if any(not g_f.has_edge(x, full[j]) for j in back):
                continue
            d = w_sub - g_f.weight(last, x)
            out.append((full + (x,), diffs + (d,), total + d))
    return out


def _seed_partial(anchor_image: int) -> list[_Partial]:
    return [((anchor_image,), (), 0.0)]


def feasible_path_matches(
    g_s: Graph,
    g_f: Graph,
    sub_path: Path,
    anchor_image: int,
    matched: Mapping[int, int],
    cfg: ThresholdConfig,
) -> list[PathCandidate]:
    """Feasible full-graph counterparts of a sub path leaving the matched set.

    ``sub_path[0]`` is matched to ``anchor_image``; the remaining nodes must
    be unmatched. Counterparts avoid every matched image, map every subgraph
    edge touching the new nodes onto a full-graph edge, and have averaged
    weight within ``threshold(q)`` of the sub path for ``q`` hops.
    """
    q = len(sub_path) - 1
    if q < 1:
        return []
    used = set(matched.values())
    partials = _seed_partial(anchor_image)
    for i in range(2, len(sub_path) + 1):
        partials = _extend(g_s, g_f, tuple(sub_path[:i]), partials, matched, used)
    tau = threshold(q, cfg)
    return [
        PathCandidate(tuple(sub_path), full, diffs)
        for full, diffs, total in partials
        if abs(total) / q <= tau
    ]


def _grow(
    g_s: Graph,
    g_f: Graph,
    anchor: int,
    first: int,
    matched: Mapping[int, int],
    cfg: ThresholdConfig,
    max_hops: int,
) -> tuple[PathCandidate | None, list[int]]:
    """Depth-first sub-path growth from the boundary edge ``(anchor, first)``."""
    used = set(matched.values())
    sizes: list[int] = []

    def visit(sub_path: Path, partials: list[_Partial]) -> PathCandidate | None:
        q = len(sub_path) - 1
        partials = _extend(g_s, g_f, sub_path, partials, matched, used)
        tau = threshold(q, cfg)
        feasible = [p for p in partials if abs(p[2]) / q <= tau]
        sizes.append(len(feasible))
        if len(feasible) == 1:
            full, diffs, _ = feasible[0]
            return PathCandidate(sub_path, full, diffs)
        if q >= max_hops or not partials:
            return None
        for nxt in g_s.sorted_neighbors(sub_path[-1]):
            if nxt in matched or nxt in sub_path:
                continue
            found = visit(sub_path + (nxt,), partials)
            if found is not None:
                return found
        return None

    return visit((anchor, first), _seed_partial(matched[anchor])), sizes


def total_residual(g_s: Graph, g_f: Graph, policy: Mapping[int, int]) -> float:
    return sum(
        abs(w - g_f.weight(policy[u], policy[v]))
        for u, v, w in g_s.edge_items()
        if u in policy and v in policy
    )


def expand_policy(
    g_s: Graph,
    g_f: Graph,
    initial: MatchingPolicy,
    cfg: ThresholdConfig,
    rng_seed: int = 0,
    max_hops: int = DEFAULT_MAX_HOPS,
) -> Expansion:
    """Run the consensus search from one initial policy."""
    rng = make_rng(rng_seed, 1)
    matched = dict(initial)
    exhausted: set[Edge] = set()
    exhausted_order: list[Edge] = []
    steps: list[ExpansionStep] = []
    while True:
        boundary = sorted(
            (a, b)
            for a in matched
            for b in g_s.neighbors(a)
            if b not in matched and (a, b) not in exhausted
        )
        if not boundary:
            break
        a, b = boundary[int(rng.integers(len(boundary)))]
        found, sizes = _grow(g_s, g_f, a, b, matched, cfg, max_hops)
        if found is None:
            exhausted.add((a, b))
            exhausted_order.append((a, b))
            continue
        matched.update(zip(found.sub_path[1:], found.full_path[1:]))
        steps.append(
            ExpansionStep(
                anchor_edge=(a, b),
                sub_path=found.sub_path,
                full_path=found.full_path,
                hops=found.hops,
                residual=found.residual,
                threshold=threshold(found.hops, cfg),
                feasible_sizes=sizes,
            )
        )
    policy = MatchingPolicy(matched)
    return Expansion(
        initial=initial,
        policy=policy,
        steps=steps,
        exhausted=exhausted_order,
        total_residual=total_residual(g_s, g_f, policy),
    )


def consensus_expand(
    g_s: Graph,
    g_f: Graph,
    initial: FeasibleSet,
    cfg: ThresholdConfig,
    rng_seed: int = 0,
    max_hops: int = DEFAULT_MAX_HOPS,
) -> ConsensusResult:
    """Expand every initial policy and keep the one matching the most nodes
    (ties broken by smallest summed absolute edge residual)."""
    if not initial.candidates:
        raise ValueError("initial feasible set is empty")
    expansions = [
        expand_policy(g_s, g_f, policy, cfg, rng_seed, max_hops) for policy in initial.candidates
    ]
    best = min(
        range(len(expansions)),
        key=lambda i: (-expansions[i].matched, expansions[i].total_residual, i),
    )
    return ConsensusResult(expansions[best].policy, expansions[best], expansions)
