"""End-to-end matching: topology unit first, then consensus expansion."""
from __future__ import annotations

import statistics
from dataclasses import dataclass, field

from .consensus import DEFAULT_MAX_HOPS, ConsensusResult, consensus_expand
from .graph import Graph
from .matching import DEFAULT_TRIES, FeasibleSet, MatchingPolicy, ThresholdConfig, topology_match
from .rng import derive_seed
from .stats import estimate_sigma

# sigma floor for the second pass when the first pass matched exactly
_MIN_SIGMA = 1e-12


@dataclass
class MatchResult:
    policy: MatchingPolicy
    feasible: FeasibleSet
    consensus: ConsensusResult | None
    cfg: ThresholdConfig
    seed: int
    n_tries: int
    sigma_history: list[float] = field(default_factory=list)

    @property
    def feasible_sizes(self) -> list[int]:
        return [entry["feasible"] for entry in self.feasible.diagnostics]


def edge_residuals(g_s: Graph, g_f: Graph, policy) -> list[float]:
    """Signed ``w_s - w_f`` for every subgraph edge with both ends matched."""
    return [
        w - g_f.weight(policy[u], policy[v])
        for u, v, w in g_s.edge_items()
        if u in policy and v in policy
    ]


def default_sigma0(g_s: Graph) -> float:
    """Conservative starting sigma: 1% of the median subgraph edge weight."""
    weights = [abs(w) for *_, w in g_s.edge_items()]
    return 0.01 * statistics.median(weights) if weights else 1.0


def _single_pass(g_s, g_f, cfg, n_tries, seed, max_hops):
    feasible = topology_match(g_s, g_f, cfg, n_tries, derive_seed(seed, 0))
    if not feasible:
        return MatchingPolicy(), feasible, None
    result = consensus_expand(g_s, g_f, feasible, cfg, derive_seed(seed, 1), max_hops)
    return result.policy, feasible, result


def match_graphs(
    g_s: Graph,
    g_f: Graph,
    cfg: ThresholdConfig,
    n_tries: int = DEFAULT_TRIES,
    seed: int = 0,
    max_hops: int = DEFAULT_MAX_HOPS,
    estimate: bool = False,
) -> MatchResult:
    """Match ``g_s`` into ``g_f``.

    With ``estimate=True`` the first pass runs at ``cfg.sigma``; sigma is then
    re-estimated from the matched edge residuals and the match is re-run once.
    """
    policy, feasible, consensus = _single_pass(g_s, g_f, cfg, n_tries, seed, max_hops)
    history = [cfg.sigma]
    if estimate:
        residuals = edge_residuals(g_s, g_f, policy)
        if len(residuals) >= 2:
            sigma_hat = max(estimate_sigma(residuals), _MIN_SIGMA)
            cfg = cfg.replace(sigma=sigma_hat)
            history.append(sigma_hat)
            policy, feasible, consensus = _single_pass(g_s, g_f, cfg, n_tries, seed, max_hops)
    return MatchResult(policy, feasible, consensus, cfg, seed, n_tries, history)
