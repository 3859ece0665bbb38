import itertools

import pytest
from hypothesis import given, settings, strategies as st

from topomatch.consensus import consensus_expand, expand_policy, feasible_path_matches
from topomatch.errors import AssumptionViolation
from topomatch.graph import build_graph
from topomatch.matching import (
    FeasibleSet,
    MatchingPolicy,
    ThresholdConfig,
    build_unit,
    check_assumptions,
    is_topology_consistent,
    threshold,
    topology_match,
)
from topomatch.rng import make_rng
from topomatch.simulate import accuracy, inject_noise, sample_subgraph

from conftest import er


def planted(seed, n_f=30, p=0.25, n_s=12, sigma=0.0):
    for k in range(200):
        rng = make_rng(seed, k)
        g_f = er(n_f, p, 1000 * seed + k)
        g_s, truth = sample_subgraph(g_f, n_s, 1.01, rng)
        try:
            pairs = check_assumptions(g_s)
        except AssumptionViolation:
            continue
        return g_f, inject_noise(g_s, sigma, rng), truth, pairs
    raise RuntimeError("no valid instance")


def brute_path_matches(g_s, g_f, sub_path, anchor_image, matched, cfg):
    q = len(sub_path) - 1
    used = set(matched.values())
    free = [x for x in g_f.nodes() if x not in used]
    out = []
    for tail in itertools.permutations(free, q):
        full = (anchor_image,) + tail
        if not all(g_f.has_edge(a, b) for a, b in zip(full, full[1:])):
            continue
        policy = dict(matched)
        policy.update(zip(sub_path[1:], tail))
        if not is_topology_consistent(policy, g_s, g_f):
            continue
        total = sum(g_s.weight(a, b) - g_f.weight(x, y)
                    for (a, b), (x, y) in zip(zip(sub_path, sub_path[1:]), zip(full, full[1:])))
        if abs(total) / q <= threshold(q, cfg):
            out.append(full)
    return sorted(out)


def test_single_hop_unique_candidate():
    g = build_graph([(0, 1, 0.5), (1, 2, 0.6), (0, 2, 0.7), (2, 3, 0.15), (2, 4, 0.85)])
    matched = MatchingPolicy({0: 0, 1: 1, 2: 2})
    out = feasible_path_matches(g, g, (2, 3), 2, matched, ThresholdConfig(sigma=0.001))
    assert [c.full_path for c in out] == [(2, 3)]
    assert out[0].residual == 0.0 and out[0].hops == 1


def test_dead_end_anchor():
    sub = build_graph([(0, 1, 0.5), (1, 2, 0.6), (0, 2, 0.7), (2, 3, 0.15)])
    full = build_graph([(0, 1, 0.5), (1, 2, 0.6), (0, 2, 0.7)], node_count=4)
    matched = MatchingPolicy({0: 0, 1: 1, 2: 2})
    assert feasible_path_matches(sub, full, (2, 3), 2, matched, ThresholdConfig(sigma=1.0)) == []


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("q", [1, 2, 3])
def test_path_matches_equal_brute_enumeration(seed, q):
    g_f, g_s, truth, pairs = planted(seed, n_f=14, p=0.4, n_s=9, sigma=0.01)
    matched = MatchingPolicy({v: truth[v] for v in pairs[0][0]})
    cfg = ThresholdConfig(sigma=0.1)
    rng = make_rng(seed, q)
    checked = 0
    for anchor in sorted(matched):
        for first in sorted(g_s.neighbors(anchor) - set(matched)):
            sub_path = [anchor, first]
            while len(sub_path) <= q:
                nxt = sorted(g_s.neighbors(sub_path[-1]) - set(matched) - set(sub_path))
                if not nxt:
                    break
                sub_path.append(nxt[int(rng.integers(len(nxt)))])
            if len(sub_path) != q + 1:
                continue
            sub_path = tuple(sub_path)
            got = sorted(c.full_path for c in feasible_path_matches(g_s, g_f, sub_path, matched[anchor], matched, cfg))
            assert got == brute_path_matches(g_s, g_f, sub_path, matched[anchor], matched, cfg)
            checked += 1
    if not checked:
        pytest.skip("no sub path of this length")


@pytest.mark.parametrize("seed", range(10))
def test_zero_noise_expansion_recovers_truth(seed):
    g_f, g_s, truth, pairs = planted(seed)
    unit = build_unit(g_s, *pairs[0])
    initial = MatchingPolicy({v: truth[v] for v in unit.node_set})
    fs = FeasibleSet(unit, [initial])
    res = consensus_expand(g_s, g_f, fs, ThresholdConfig(sigma=1e-9), rng_seed=seed)
    assert res.policy == truth


def test_unit_only_subgraph_has_no_steps():
    g = build_graph([(0, 1, 0.5), (1, 2, 0.6), (0, 2, 0.7), (3, 4, 0.2), (4, 5, 0.3), (3, 5, 0.4), (2, 3, 0.9)])
    fs = topology_match(g, g, ThresholdConfig(sigma=1e-6))
    res = consensus_expand(g, g, fs, ThresholdConfig(sigma=1e-6))
    assert res.steps == []
    assert res.policy == res.best.initial


def test_empty_initial_rejected():
    g = build_graph([(0, 1, 0.5)])
    with pytest.raises(ValueError):
        consensus_expand(g, g, FeasibleSet(None, []), ThresholdConfig(sigma=0.1))


@given(st.integers(0, 10_000), st.sampled_from([0.0, 0.001, 0.005, 0.01]))
@settings(max_examples=25)
def test_every_step_keeps_policy_valid(seed, sigma):
    g_f, g_s, truth, pairs = planted(seed % 50, sigma=sigma)
    cfg = ThresholdConfig(sigma=max(sigma, 1e-9))
    unit = build_unit(g_s, *pairs[0])
    initial = MatchingPolicy({v: truth[v] for v in unit.node_set})
    exp = expand_policy(g_s, g_f, initial, cfg, rng_seed=seed)
    matched = dict(initial)
    acc = accuracy(matched, truth)
    for step in exp.steps:
        assert step.sub_path[0] in matched
        assert not set(step.sub_path[1:]) & set(matched)
        again = feasible_path_matches(g_s, g_f, step.sub_path, matched[step.sub_path[0]], matched, cfg)
        assert [c.full_path for c in again] == [step.full_path]
        assert step.residual <= threshold(step.hops, cfg) == step.threshold
        matched.update(zip(step.sub_path[1:], step.full_path[1:]))
        assert is_topology_consistent(matched, g_s, g_f)
        MatchingPolicy(matched)  # injective
        if sigma == 0.0:
            # with exact weights and a true start no accepted step is wrong
            new_acc = accuracy(matched, truth)
            assert new_acc > acc
            acc = new_acc
    assert MatchingPolicy(matched) == exp.policy


def test_expansion_deterministic():
    g_f, g_s, truth, pairs = planted(3, sigma=0.005)
    cfg = ThresholdConfig(sigma=0.005)
    fs = topology_match(g_s, g_f, cfg, rng_seed=1)
    a = consensus_expand(g_s, g_f, fs, cfg, rng_seed=9)
    b = consensus_expand(g_s, g_f, fs, cfg, rng_seed=9)
    assert a.policy == b.policy
    assert [s.to_dict() for s in a.steps] == [s.to_dict() for s in b.steps]


def test_best_expansion_selected():
    g_f, g_s, truth, pairs = planted(4, sigma=0.005)
    cfg = ThresholdConfig(sigma=0.02)
    fs = topology_match(g_s, g_f, cfg, rng_seed=2)
    res = consensus_expand(g_s, g_f, fs, cfg, rng_seed=0)
    key = lambda e: (-e.matched, e.total_residual)
    assert key(res.best) == min(key(e) for e in res.expansions)
