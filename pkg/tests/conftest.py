import os

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from topomatch.graph import build_graph
from topomatch.rng import make_rng
from topomatch.simulate import gen_er

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def er(n, p, seed):
    return gen_er(n, p, make_rng(seed))


@st.composite
def graphs(draw, max_nodes=10, min_nodes=1, weights=st.floats(0.0, 1.0)):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return build_graph(((u, v, draw(weights)) for u, v in chosen), node_count=n)


def two_triangle_subgraph():
    """Two triangles {3,8,9}, {6,11,12} joined through node 13, plus tails."""
    edges = [
        (3, 8), (3, 9), (8, 9), (6, 11), (6, 12), (11, 12), (8, 13), (13, 12),
        (0, 3), (1, 0), (2, 9), (4, 6), (7, 4), (5, 11), (10, 5),
    ]
    return build_graph((u, v, 0.1 + 0.05 * k) for k, (u, v) in enumerate(edges))


@pytest.fixture
def two_triangle():
    return two_triangle_subgraph()
