"""Inexact subgraph matching for weighted graphs without node labels."""

__version__ = "0.1.0"

from .graph import Graph, build_graph, enumerate_simplexes, shortest_hop_path  # noqa: E402
from .matching import (  # noqa: E402
    MatchingPolicy,
    ThresholdConfig,
    TopologyUnit,
    threshold,
    topology_match,
)
from .consensus import consensus_expand  # noqa: E402
from .pipeline import MatchResult, match_graphs  # noqa: E402

__all__ = [
    "Graph",
    "MatchResult",
    "MatchingPolicy",
    "ThresholdConfig",
    "TopologyUnit",
    "build_graph",
    "consensus_expand",
    "enumerate_simplexes",
    "match_graphs",
    "shortest_hop_path",
    "threshold",
    "topology_match",
]
