import itertools
import math

import numpy as np
import pytest

from topomatch.errors import GrowthFailure
from topomatch.graph import build_graph, enumerate_simplexes
from topomatch.matching import MatchingPolicy, check_assumptions, is_topology_consistent
from topomatch.rng import make_rng
from topomatch.simulate import (
    CSV_COLUMNS,
    DEFAULT_SIGMAS,
    McReport,
    SimConfig,
    accuracy,
    gen_er,
    inject_noise,
    loglog_slope,
    run_monte_carlo,
    run_scaling_bench,
    sample_subgraph,
)


def test_standard_defaults():
    cfg = SimConfig()
    assert (cfg.n_f, cfg.edge_prob, cfg.n_s, cfg.weight_cutoff) == (100, 0.1, 20, 0.5)
    assert cfg.iterations == 100 and cfg.alpha == 0.025
    assert cfg.sigma_grid == (0.001, 0.002, 0.003, 0.004, 0.005, 0.006, 0.007, 0.008, 0.009, 0.01)
    assert SimConfig.from_dict(cfg.to_dict()) == cfg


def test_gen_er_extremes():
    assert gen_er(10, 0.0, make_rng(0)).edge_count == 0
    k5 = gen_er(5, 1.0, make_rng(0))
    assert k5.edge_count == 10
    assert all(0 <= w < 1 for *_, w in k5.edge_items())
    with pytest.raises(ValueError):
        gen_er(0, 0.5, make_rng(0))
    with pytest.raises(ValueError):
        gen_er(5, 1.5, make_rng(0))


def test_gen_er_mean_edge_count():
    counts = [gen_er(100, 0.1, make_rng(s)).edge_count for s in range(1000)]
    n_pairs = math.comb(100, 2)
    sd = math.sqrt(n_pairs * 0.1 * 0.9)
    # mean of 1000 draws within 3 standard errors of C(100,2)*0.1
    assert abs(np.mean(counts) - 495) <= 3 * sd / math.sqrt(1000)


def test_gen_er_weights_uniform():
    w = [w for *_, w in gen_er(200, 0.2, make_rng(1)).edge_items()]
    assert abs(np.mean(w) - 0.5) < 0.02
    assert abs(np.var(w) - 1 / 12) < 0.01


def test_sample_all_traversable():
    g = build_graph((u, v, 0.1) for u, v in itertools.combinations(range(8), 2))
    g_s, truth = sample_subgraph(g, 5, 0.5, make_rng(0))
    assert g_s.edge_count == 10
    assert len(set(truth.values())) == 5


def test_sample_growth_failure():
    g = build_graph((u, v, 0.7) for u, v in itertools.combinations(range(8), 2))
    with pytest.raises(GrowthFailure):
        sample_subgraph(g, 5, 0.5, make_rng(0), max_retries=5)


@pytest.mark.parametrize("seed", range(10))
def test_sampled_truth_is_induced(seed):
    rng = make_rng(seed)
    g_f = gen_er(100, 0.1, rng)
    g_s, truth = sample_subgraph(g_f, 20, 0.5, rng)
    assert g_s.is_connected()
    assert is_topology_consistent(truth, g_s, g_f)
    for u, v in itertools.combinations(range(20), 2):
        assert g_s.has_edge(u, v) == g_f.has_edge(truth[u], truth[v])
        if g_s.has_edge(u, v):
            assert g_s.weight(u, v) == g_f.weight(truth[u], truth[v])


def test_valid_instances_meet_assumptions():
    cfg = SimConfig(iterations=5, sigma_grid=DEFAULT_SIGMAS[:2])
    from topomatch.simulate import _valid_instance

    for s in range(10):
        g_f, g_s, truth, retries, status = _valid_instance(cfg, make_rng(0, s))
        assert status == "ok"
        assert len(enumerate_simplexes(g_s, 2)) >= 2
        check_assumptions(g_s)


def test_inject_noise():
    g = gen_er(60, 0.3, make_rng(2))
    assert inject_noise(g, 0.0, make_rng(0)) == g
    noisy = inject_noise(g, 0.01, make_rng(3))
    assert noisy.edges == g.edges
    resid = [noisy.weight(*e) - g.weight(*e) for e in g.edges]
    assert len(resid) >= 100
    assert 0.008 <= np.std(resid, ddof=1) <= 0.012
    with pytest.raises(ValueError):
        inject_noise(g, -1, make_rng(0))


def test_accuracy_counts():
    truth = MatchingPolicy({i: i + 100 for i in range(20)})
    assert accuracy(truth, truth) == 1.0
    assert accuracy({}, truth) == 0.0
    off = dict(truth)
    off[0] = 999
    assert accuracy(off, truth) == 0.95


def small_cfg(**kw):
    base = dict(sigma_grid=(0.001, 0.01), iterations=6, master_seed=3)
    base.update(kw)
    return SimConfig(**base)


def test_report_shape_and_recomputed_accuracy():
    rep = run_monte_carlo(small_cfg(), workers=1)
    assert len(rep.rows) == 12
    assert [(r.sigma, r.iter) for r in rep.rows] == [(s, i) for s in (0.001, 0.01) for i in range(6)]
    for r in rep.rows:
        assert 0 <= r.accuracy <= 1
        assert r.accuracy == accuracy(dict(r.found), MatchingPolicy(r.truth))
        assert r.matched == len(r.found)


def test_zero_noise_grid_is_exact():
    rep = run_monte_carlo(small_cfg(sigma_grid=(0.0,), iterations=20), workers=1)
    assert all(r.status == "ok" for r in rep.rows)
    assert rep.mean_accuracy()[0.0] == 1.0


def test_report_deterministic_and_serialisable():
    a = run_monte_carlo(small_cfg(), workers=1)
    b = run_monte_carlo(small_cfg(), workers=1)
    strip = lambda rep: [(r.accuracy, r.found, r.seed, r.retries) for r in rep.rows]
    assert strip(a) == strip(b)
    back = McReport.from_record(a.to_record())
    assert strip(back) == strip(a)
    lines = a.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 13


def test_scaling_single_row_and_slope():
    rep = run_scaling_bench([100], iterations=2)
    assert len(rep.rows) == 1 and math.isnan(rep.slope)
    assert loglog_slope([1, 10, 100], [2, 20, 200]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        run_scaling_bench([200, 100])


def test_scaling_deterministic_seeds():
    a = run_scaling_bench([100, 200], iterations=2, master_seed=4)
    b = run_scaling_bench([100, 200], iterations=2, master_seed=4)
    assert [n for n, _ in a.rows] == [n for n, _ in b.rows] == [100, 200]
