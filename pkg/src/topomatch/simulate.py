"""Monte Carlo study on Erdos-Renyi graphs and runtime scaling benchmark."""
from __future__ import annotations

import csv
import io
import math
import os
import time
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .consensus import DEFAULT_MAX_HOPS
from .errors import AssumptionViolation, GrowthFailure
from .graph import Graph, build_graph
from .matching import DEFAULT_TRIES, MatchingPolicy, ThresholdConfig, check_assumptions
from .pipeline import match_graphs
from .rng import derive_seed, make_rng

DEFAULT_SIGMAS = tuple(round(0.001 * k, 3) for k in range(1, 11))
CSV_COLUMNS = ("sigma", "iter", "accuracy", "runtime_ms", "seed", "matched", "retries")
REPORT_SCHEMA = "topomatch.mc-report/1"
WORKERS_ENV = "TOPOMATCH_WORKERS"
MAX_RETRIES = 100


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SimConfig:
    n_f: int = 100
    edge_prob: float = 0.1
    n_s: int = 20
    weight_cutoff: float = 0.5
    sigma_grid: tuple[float, ...] = DEFAULT_SIGMAS
    iterations: int = 100
    alpha: float = 0.025
    master_seed: int = 0
    p: int = 2
    count_mode: str = "edges"
    n_tries: int = DEFAULT_TRIES
    max_hops: int = DEFAULT_MAX_HOPS

    def to_dict(self) -> dict:
        d = asdict(self)
        d["sigma_grid"] = list(self.sigma_grid)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> SimConfig:
        d = dict(d)
        d["sigma_grid"] = tuple(d["sigma_grid"])
        return cls(**d)


def gen_er(n: int, p: float, rng: np.random.Generator) -> Graph:
    """G(n, p) with i.i.d. U(0, 1) edge weights."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    rows, cols = np.triu_indices(n, 1)
    keep = rng.random(rows.size) < p
    weights = rng.random(int(keep.sum()))
    return build_graph(
        zip(rows[keep].tolist(), cols[keep].tolist(), weights.tolist()), node_count=n
    )


def sample_subgraph(
    g_f: Graph,
    n_s: int,
    weight_cutoff: float,
    rng: np.random.Generator,
    max_retries: int = MAX_RETRIES,
) -> tuple[Graph, MatchingPolicy]:
    """Grow ``n_s`` nodes by BFS over edges lighter than ``weight_cutoff``.

    The returned subgraph is the induced subgraph on the collected nodes with
    ids shuffled; ``truth`` maps subgraph ids back to full-graph ids.
    """
    if n_s > g_f.node_count:
        raise GrowthFailure(f"cannot sample {n_s} nodes from {g_f.node_count}")
    for _ in range(max_retries):
        start = int(rng.integers(g_f.node_count))
        order = [start]
        seen = {start}
        queue = deque([start])
        while queue and len(order) < n_s:
            u = queue.popleft()
            for x in g_f.sorted_neighbors(u):
                if x not in seen and g_f.weight(u, x) < weight_cutoff:
                    seen.add(x)
                    order.append(x)
                    queue.append(x)
                    if len(order) == n_s:
                        break
        if len(order) == n_s:
            nodes = [order[i] for i in rng.permutation(n_s)]
            return g_f.induced(nodes), MatchingPolicy(enumerate(nodes))
    raise GrowthFailure(f"no component of size {n_s} reachable below cutoff {weight_cutoff}")


def inject_noise(g: Graph, sigma: float, rng: np.random.Generator) -> Graph:
    """Add i.i.d. N(0, sigma^2) noise to every edge weight."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return g
    edges = g.edges
    noise = rng.normal(0.0, sigma, len(edges))
    return g.with_weights({e: g.weight(*e) + float(eps) for e, eps in zip(edges, noise)})


def accuracy(found: Mapping[int, int], truth: Mapping[int, int]) -> float:
    """Fraction of subgraph nodes mapped to their true counterpart."""
    if not truth:
        return 0.0
    return sum(1 for v, t in truth.items() if found.get(v) == t) / len(truth)


@dataclass
class McRow:
    sigma: float
    iter: int
    accuracy: float
    runtime_ms: float
    seed: int
    matched: int
    retries: int
    status: str = "ok"
    feasible_set_sizes: list[int] = field(default_factory=list)
    found: list[tuple[int, int]] = field(default_factory=list)
    truth: list[tuple[int, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["found"] = [list(p) for p in self.found]
        d["truth"] = [list(p) for p in self.truth]
        return d


@dataclass
class McReport:
    config: SimConfig
    rows: list[McRow]
    workers: int = 1

    def accuracies(self) -> list[float]:
        return [r.accuracy for r in self.rows]

    def by_sigma(self) -> dict[float, list[McRow]]:
        out: dict[float, list[McRow]] = {}
        for r in self.rows:
            out.setdefault(r.sigma, []).append(r)
        return out

    def mean_accuracy(self) -> dict[float, float]:
        return {
            s: float(np.mean([r.accuracy for r in rows if r.status == "ok"]))
            for s, rows in self.by_sigma().items()
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([repr(r.sigma), r.iter, repr(r.accuracy), f"{r.runtime_ms:.3f}",
                             r.seed, r.matched, r.retries])
        return buf.getvalue()

    def to_record(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "config": self.config.to_dict(),
            "workers": self.workers,
            "rows": [r.to_dict() for r in self.rows],
        }

    @classmethod
    def from_record(cls, doc: Mapping) -> McReport:
        if doc.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"unsupported report schema {doc.get('schema')!r}")
        rows = []
        for d in doc["rows"]:
            d = dict(d)
            d["found"] = [tuple(p) for p in d["found"]]
            d["truth"] = [tuple(p) for p in d["truth"]]
            rows.append(McRow(**d))
        return cls(SimConfig.from_dict(doc["config"]), rows, doc.get("workers", 1))


def _valid_instance(cfg: SimConfig, rng: np.random.Generator):
    """Draw (g_f, g_s, truth) satisfying the unit assumptions; count redraws."""
    retries = 0
    last = "growth-failure"
    while retries <= MAX_RETRIES:
        g_f = gen_er(cfg.n_f, cfg.edge_prob, rng)
        try:
            g_s, truth = sample_subgraph(g_f, cfg.n_s, cfg.weight_cutoff, rng)
            check_assumptions(g_s, cfg.p)
            return g_f, g_s, truth, retries, "ok"
        except GrowthFailure:
            last = "growth-failure"
        except AssumptionViolation:
            last = "assumption-violation"
        retries += 1
    return None, None, None, retries, last


def run_instance(cfg: SimConfig, sigma_idx: int, it: int) -> McRow:
    sigma = cfg.sigma_grid[sigma_idx]
    rng = make_rng(cfg.master_seed, sigma_idx, it)
    seed = derive_seed(cfg.master_seed, sigma_idx, it)
    g_f, g_s, truth, retries, status = _valid_instance(cfg, rng)
    if status != "ok":
        return McRow(sigma, it, math.nan, 0.0, seed, 0, retries, status)
    noisy = inject_noise(g_s, sigma, rng)
    tcfg = ThresholdConfig(sigma=sigma, alpha=cfg.alpha, p=cfg.p, count_mode=cfg.count_mode)
    start = time.perf_counter()
    result = match_graphs(noisy, g_f, tcfg, cfg.n_tries, seed, cfg.max_hops)
    runtime_ms = (time.perf_counter() - start) * 1e3
    return McRow(
        sigma=sigma,
        iter=it,
        accuracy=accuracy(result.policy, truth),
        runtime_ms=runtime_ms,
        seed=seed,
        matched=len(result.policy),
        retries=retries,
        feasible_set_sizes=result.feasible_sizes,
        found=list(result.policy.pairs()),
        truth=list(truth.pairs()),
    )


def _run_task(args) -> McRow:
    return run_instance(*args)


def _map_ordered(tasks: Sequence, workers: int):
    if workers <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def run_monte_carlo(cfg: SimConfig, workers: int | None = None) -> McReport:
    """One row per (sigma, iteration); rows come back in grid order whatever
    the worker count."""
    workers = default_workers() if workers is None else workers
    tasks = [(cfg, s, it) for s in range(len(cfg.sigma_grid)) for it in range(cfg.iterations)]
    return McReport(cfg, _map_ordered(tasks, workers), workers)


@dataclass
class ScalingReport:
    rows: list[tuple[int, float]]
    slope: float
    degree: float
    iterations: int

    def to_dict(self) -> dict:
        return {
            "rows": [{"n_f": n, "median_runtime_ms": t} for n, t in self.rows],
            "slope": self.slope,
            "degree": self.degree,
            "iterations": self.iterations,
        }


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)


def run_scaling_bench(
    n_f_grid: Sequence[int],
    n_s: int = 20,
    degree: float = 10.0,
    sigma: float = 0.005,
    iterations: int = 10,
    master_seed: int = 0,
    alpha: float = 0.025,
    workers: int | None = None,
) -> ScalingReport:
    """Median match+expand runtime per full-graph size at constant expected degree."""
    grid = list(n_f_grid)
    if grid != sorted(grid):
        raise ValueError("n_f grid must be sorted ascending")
    workers = default_workers() if workers is None else workers
    rows = []
    for n_f in grid:
        cfg = SimConfig(
            n_f=n_f,
            edge_prob=min(1.0, degree / n_f),
            n_s=n_s,
            sigma_grid=(sigma,),
            iterations=iterations,
            alpha=alpha,
            master_seed=derive_seed(master_seed, n_f),
        )
        report = run_monte_carlo(cfg, workers)
        times = [r.runtime_ms for r in report.rows if r.status == "ok"]
        rows.append((n_f, float(np.median(times)) if times else math.nan))
    slope = loglog_slope([n for n, _ in rows], [t for _, t in rows])
    return ScalingReport(rows, slope, degree, iterations)
