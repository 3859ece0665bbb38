"""``topomatch`` command line.

Exit codes: 0 success, 1 runtime error, 2 usage error. Errors are written to
stderr as one JSON object; stdout summaries are ``key=value`` lines.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import TopomatchError
from .rng import fresh_seed, make_rng

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(**fields) -> None:
    for k, v in fields.items():
        print(f"{k}={v}")


def _error_record(kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def _seed(args) -> int:
    if args.seed is None:
        args.seed = fresh_seed()
        _emit(seed=args.seed)
    return args.seed


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# -- subcommands -------------------------------------------------------------

def cmd_gen(args) -> int:
    from .io import write_graph_file
    from .simulate import gen_er

    seed = _seed(args)
    g = gen_er(args.n, args.edge_prob, make_rng(seed))
    write_graph_file(g, args.out, args.format,
                     metadata={"model": "er", "n": args.n, "edge_prob": args.edge_prob, "seed": seed})
    _emit(nodes=g.node_count, edges=g.edge_count, seed=seed, out=args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    from .io import parse_graph_file, truth_to_record, write_graph_file, write_json
    from .simulate import inject_noise, sample_subgraph

    seed = _seed(args)
    g_f = parse_graph_file(args.full, args.format)
    rng = make_rng(seed)
    g_s, truth = sample_subgraph(g_f, args.n_s, args.cutoff, rng)
    g_s = inject_noise(g_s, args.sigma, rng)
    write_graph_file(g_s, args.out, args.format, metadata={"sigma": args.sigma, "seed": seed})
    if args.truth:
        write_json(truth_to_record(truth), args.truth)
    _emit(nodes=g_s.node_count, edges=g_s.edge_count, sigma=args.sigma, seed=seed, out=args.out)
    return EXIT_OK


def cmd_match(args) -> int:
    from .io import match_document, parse_graph_file, read_json, truth_from_record, write_json
    from .matching import ThresholdConfig
    from .pipeline import default_sigma0, match_graphs

    seed = _seed(args)
    g_s = parse_graph_file(args.sub, args.format)
    g_f = parse_graph_file(args.full, args.format)
    if args.sigma is None and not args.estimate_sigma:
        raise UsageError("--sigma is required unless --estimate-sigma is given")
    sigma = args.sigma if args.sigma is not None else default_sigma0(g_s)
    cfg = ThresholdConfig(sigma=sigma, alpha=args.alpha, p=args.p, count_mode=args.count_mode)
    result = match_graphs(g_s, g_f, cfg, args.tries, seed, args.max_hops, args.estimate_sigma)
    truth = truth_from_record(read_json(args.truth)) if args.truth else None
    params = {
        "alpha": args.alpha,
        "sigma": args.sigma,
        "estimate_sigma": args.estimate_sigma,
        "p": args.p,
        "count_mode": args.count_mode,
        "seed": seed,
        "tries": args.tries,
        "max_hops": args.max_hops,
    }
    doc = match_document(result, g_s, params, truth)
    if args.out:
        write_json(doc, args.out)
    else:
        print(json.dumps(doc))
    summary = {"matched": len(doc["matches"]), "unmatched": len(doc["unmatched"]),
               "sigma_used": result.cfg.sigma, "seed": seed}
    if truth is not None:
        summary["accuracy"] = doc["accuracy"]
    if args.out:
        _emit(**summary, out=args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .io import write_json
    from .plot import emit_boxplot
    from .simulate import DEFAULT_SIGMAS, SimConfig, run_monte_carlo

    seed = _seed(args)
    cfg = SimConfig(
        n_f=args.n_f, edge_prob=args.edge_prob, n_s=args.n_s, weight_cutoff=args.cutoff,
        sigma_grid=args.sigmas or DEFAULT_SIGMAS, iterations=args.iterations,
        alpha=args.alpha, master_seed=seed,
    )
    report = run_monte_carlo(cfg, args.workers)
    Path(args.csv).write_text(report.to_csv())
    if args.json:
        write_json(report.to_record(), args.json)
    if args.boxplot:
        emit_boxplot(report, args.boxplot)
    means = report.mean_accuracy()
    _emit(rows=len(report.rows), workers=report.workers, seed=seed, csv=args.csv)
    for s, m in means.items():
        _emit(**{f"mean_accuracy[{s!r}]": m})
    return EXIT_OK


def cmd_scale(args) -> int:
    from .io import write_json
    from .simulate import run_scaling_bench

    seed = _seed(args)
    rep = run_scaling_bench(args.grid, args.n_s, args.degree, args.sigma, args.iterations,
                            seed, args.alpha, args.workers)
    for n_f, t in rep.rows:
        _emit(**{f"median_runtime_ms[{n_f}]": f"{t:.4f}"})
    _emit(slope=f"{rep.slope:.4f}", seed=seed)
    if args.json:
        write_json({**rep.to_dict(), "seed": seed}, args.json)
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .io import parse_graph_file, write_json
    from .oracle import exact_isomorphisms, qap_best

    g_s = parse_graph_file(args.sub, args.format)
    g_f = parse_graph_file(args.full, args.format)
    if args.mode == "exact":
        policies = exact_isomorphisms(g_s, g_f, args.budget)
        doc = {"mode": "exact", "policies": [[list(p) for p in m.pairs()] for m in policies]}
        _emit(mode="exact", count=len(policies))
    else:
        res = qap_best(g_s, g_f, args.budget)
        doc = {"mode": "qap", "policies": [[list(p) for p in m.pairs()] for m in res.policies],
               "objectives": res.objectives}
        _emit(mode="qap", count=len(res.policies), best_objective=res.best_objective)
    if args.out:
        write_json(doc, args.out)
    return EXIT_OK


def cmd_tri(args) -> int:
    from .geometry import delaunay_graph
    from .io import parse_points, write_graph_file

    ps = parse_points(Path(args.points).read_text())
    g = delaunay_graph(ps, args.seed or 0)
    write_graph_file(g, args.out, args.format, metadata={"ids": list(ps.ids)})
    _emit(nodes=g.node_count, edges=g.edge_count, out=args.out)
    return EXIT_OK


def cmd_guarantees(args) -> int:
    from .stats import guarantee_report, two_sided_critical

    rep = guarantee_report(args.mu, args.c, args.alpha)
    _emit(**rep.to_dict(), z=two_sided_critical(args.alpha))
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    from .consensus import DEFAULT_MAX_HOPS
    from .io import GRAPH_FORMATS
    from .matching import COUNT_MODES, DEFAULT_TRIES
    from .oracle import DEFAULT_BUDGET
    from .simulate import default_workers

    parser = _Parser(prog="topomatch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"topomatch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        return p

    def seeded(p):
        p.add_argument("--seed", type=int, default=None, help="master seed (drawn and printed if omitted)")

    def fmt(p):
        p.add_argument("--format", choices=GRAPH_FORMATS, default=None,
                       help="graph file format (default: record for .json, else edgelist)")

    p = add("gen", cmd_gen, "generate an Erdos-Renyi graph with U(0,1) weights")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--edge-prob", type=float, default=0.1)
    p.add_argument("--out", required=True)
    fmt(p), seeded(p)

    p = add("sample", cmd_sample, "sample a noisy subgraph and its truth map")
    p.add_argument("--full", required=True)
    p.add_argument("--n-s", type=int, default=20)
    p.add_argument("--cutoff", type=float, default=0.5)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth")
    fmt(p), seeded(p)

    p = add("match", cmd_match, "match a subgraph into a full graph")
    p.add_argument("--sub", required=True)
    p.add_argument("--full", required=True)
    p.add_argument("--alpha", type=float, default=0.025)
    p.add_argument("--sigma", type=float)
    p.add_argument("--estimate-sigma", action="store_true")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--tries", type=int, default=DEFAULT_TRIES)
    p.add_argument("--count-mode", choices=COUNT_MODES, default="edges")
    p.add_argument("--max-hops", type=int, default=DEFAULT_MAX_HOPS)
    p.add_argument("--truth", help="truth map record; adds accuracy to the output")
    p.add_argument("--out", help="write the match document here instead of stdout")
    fmt(p), seeded(p)

    p = add("bench", cmd_bench, "Monte Carlo accuracy/runtime study")
    p.add_argument("--n-f", type=int, default=100)
    p.add_argument("--edge-prob", type=float, default=0.1)
    p.add_argument("--n-s", type=int, default=20)
    p.add_argument("--cutoff", type=float, default=0.5)
    p.add_argument("--sigmas", type=_floats, default=None, help="comma-separated sigma grid")
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.025)
    p.add_argument("--workers", type=int, default=default_workers())
    p.add_argument("--csv", required=True)
    p.add_argument("--json")
    p.add_argument("--boxplot", help="SVG output path")
    seeded(p)

    p = add("scale", cmd_scale, "runtime scaling at constant expected degree")
    p.add_argument("--grid", type=_ints, default=(100, 200, 400, 800))
    p.add_argument("--n-s", type=int, default=20)
    p.add_argument("--degree", type=float, default=10.0)
    p.add_argument("--sigma", type=float, default=0.005)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--alpha", type=float, default=0.025)
    p.add_argument("--workers", type=int, default=default_workers())
    p.add_argument("--json")
    seeded(p)

    p = add("oracle", cmd_oracle, "brute-force reference solutions")
    p.add_argument("--sub", required=True)
    p.add_argument("--full", required=True)
    p.add_argument("--mode", choices=("exact", "qap"), default="exact")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--out")
    fmt(p)

    p = add("tri", cmd_tri, "Delaunay graph from a point file")
    p.add_argument("--points", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0, help="seed for the cocircular perturbation")
    fmt(p)

    p = add("guarantees", cmd_guarantees, "coverage and exclusion bounds")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--alpha", type=float, default=0.025)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _error_record("usage", str(exc))
        return EXIT_USAGE
    except TopomatchError as exc:
        _error_record(exc.kind, str(exc))
        return EXIT_RUNTIME
    except (OSError, ValueError) as exc:
        _error_record(type(exc).__name__, str(exc))
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
