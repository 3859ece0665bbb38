"""Exponential-time reference solvers for small instances.

Only used to check the matcher: exact topological embeddings by
backtracking, and the quadratic-assignment objective (summed squared weight
difference over matched edges) minimised by exhaustive search.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import BudgetExceeded
from .graph import Graph
from .matching import MatchingPolicy

DEFAULT_BUDGET = 14


@dataclass
class OracleResult:
    policies: list[MatchingPolicy]
    objectives: list[float] = field(default_factory=list)

    @property
    def best(self) -> MatchingPolicy | None:
        return self.policies[0] if self.policies else None

    @property
    def best_objective(self) -> float | None:
        return self.objectives[0] if self.objectives else None


def _check_budget(g_f: Graph, node_budget: int) -> None:
    if g_f.node_count > node_budget:
        raise BudgetExceeded(f"full graph has {g_f.node_count} nodes, budget is {node_budget}")


def _search_order(g_s: Graph) -> list[int]:
    # connected-first order so adjacency prunes early
    order: list[int] = []
    placed: set[int] = set()
    remaining = set(g_s.nodes())
    while remaining:
        nxt = max(
            remaining,
            key=lambda v: (len(g_s.neighbors(v) & placed), g_s.degree(v), -v),
        )
        order.append(nxt)
        placed.add(nxt)
        remaining.discard(nxt)
    return order


def iter_embeddings(g_s: Graph, g_f: Graph):
    """Yield every injective map ``V_s -> V_f`` that sends edges to edges."""
    order = _search_order(g_s)
    back = [[u for u in g_s.neighbors(v) if u in order[:i]] for i, v in enumerate(order)]
    assignment: dict[int, int] = {}
    used: set[int] = set()

    def place(i: int):
        if i == len(order):
            yield dict(assignment)
            return
        v = order[i]
        for x in g_f.nodes():
            if x in used or g_f.degree(x) < g_s.degree(v):
                continue
            if all(g_f.has_edge(x, assignment[u]) for u in back[i]):
                assignment[v] = x
                used.add(x)
                yield from place(i + 1)
                used.discard(x)
                del assignment[v]

    yield from place(0)


def exact_isomorphisms(g_s: Graph, g_f: Graph, node_budget: int = DEFAULT_BUDGET) -> list[MatchingPolicy]:
    """All topology-consistent injections of ``g_s`` into ``g_f``, sorted."""
    _check_budget(g_f, node_budget)
    policies = [MatchingPolicy(m) for m in iter_embeddings(g_s, g_f)]
    policies.sort(key=lambda p: p.pairs())
    return policies


def qap_objective(g_s: Graph, g_f: Graph, policy) -> float:
    return sum((w - g_f.weight(policy[u], policy[v])) ** 2 for u, v, w in g_s.edge_items())


def qap_best(g_s: Graph, g_f: Graph, node_budget: int = DEFAULT_BUDGET) -> OracleResult:
    """Every feasible injection scored by the quadratic objective, best first."""
    _check_budget(g_f, node_budget)
    scored = [
        (qap_objective(g_s, g_f, m), MatchingPolicy(m)) for m in iter_embeddings(g_s, g_f)
    ]
    scored.sort(key=lambda t: (t[0], t[1].pairs()))
    return OracleResult([p for _, p in scored], [o for o, _ in scored])
