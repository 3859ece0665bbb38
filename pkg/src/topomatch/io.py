"""File formats: edge lists, versioned JSON records, point files, truth maps
and match documents."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Mapping

from . import __version__
from .consensus import feasible_path_matches
from .errors import ParseError
from .graph import Graph, build_graph
from .matching import MatchingPolicy, ThresholdConfig, is_topology_consistent, unit_distance
from .pipeline import MatchResult

GRAPH_SCHEMA = "topomatch.graph/1"
MATCH_SCHEMA = "topomatch.match/1"
TRUTH_SCHEMA = "topomatch.truth/1"
GRAPH_FORMATS = ("edgelist", "record")


# -- graphs ------------------------------------------------------------------

def parse_edgelist(text: str) -> Graph:
    """Lines ``u v w``; ``#`` starts a comment; ids are 0-based.

    A ``# nodes N`` comment fixes the node count so trailing isolated nodes
    survive a round trip.
    """
    triples = []
    node_count = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        head = raw.strip().split()
        if len(head) == 3 and head[:2] == ["#", "nodes"] and head[2].isdigit():
            node_count = int(head[2])
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(f"expected 'u v w', got {len(fields)} fields", lineno)
        try:
            u, v = int(fields[0]), int(fields[1])
            w = float(fields[2])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if u < 0 or v < 0:
            raise ParseError("node ids must be non-negative", lineno)
        triples.append((u, v, w))
    if node_count is not None and any(max(u, v) >= node_count for u, v, _ in triples):
        raise ParseError(f"node id exceeds declared node count {node_count}")
    return build_graph(triples, node_count=node_count)


def format_edgelist(g: Graph) -> str:
    lines = [f"# nodes {g.node_count}"]
    lines += [f"{u} {v} {w!r}" for u, v, w in g.edge_items()]
    return "\n".join(lines) + "\n"


def graph_to_record(g: Graph, metadata: Mapping | None = None) -> dict:
    return {
        "schema": GRAPH_SCHEMA,
        "node_count": g.node_count,
        "edges": [list(e) for e in g.edges],
        "weights": [g.weight(*e) for e in g.edges],
        "metadata": dict(metadata or {}),
    }


def graph_from_record(doc: Mapping) -> Graph:
    if doc.get("schema") != GRAPH_SCHEMA:
        raise ParseError(f"unsupported graph schema {doc.get('schema')!r}")
    edges, weights = doc.get("edges"), doc.get("weights")
    if not isinstance(edges, list) or not isinstance(weights, list) or len(edges) != len(weights):
        raise ParseError("edges and weights must be equal-length arrays")
    try:
        triples = [(int(u), int(v), float(w)) for (u, v), w in zip(edges, weights)]
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad edge entry: {exc}") from None
    return build_graph(triples, node_count=int(doc["node_count"]))


def _load_json(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None


def parse_graph_text(text: str, fmt: str = "edgelist") -> Graph:
    if fmt == "edgelist":
        return parse_edgelist(text)
    if fmt == "record":
        return graph_from_record(_load_json(text))
    raise ValueError(f"unknown graph format {fmt!r}")


def guess_format(path) -> str:
    return "record" if str(path).endswith(".json") else "edgelist"


def parse_graph_file(path, fmt: str | None = None) -> Graph:
    return parse_graph_text(Path(path).read_text(), fmt or guess_format(path))


def write_graph_file(g: Graph, path, fmt: str | None = None, metadata: Mapping | None = None) -> None:
    fmt = fmt or guess_format(path)
    if fmt == "edgelist":
        text = format_edgelist(g)
    elif fmt == "record":
        text = json.dumps(graph_to_record(g, metadata), indent=1) + "\n"
    else:
        raise ValueError(f"unknown graph format {fmt!r}")
    Path(path).write_text(text)


# -- points ------------------------------------------------------------------

def parse_points(text: str):
    """``id x y`` lines (``#`` comments) or CSV with an ``id,x,y`` header."""
    from .geometry import PointSet

    lines = [(i, l.split("#", 1)[0].strip()) for i, l in enumerate(text.splitlines(), start=1)]
    lines = [(i, l) for i, l in lines if l]
    if not lines:
        raise ParseError("no points")
    rows: list[tuple[int, list[str]]] = []
    if "," in lines[0][1]:
        reader = csv.reader(io.StringIO("\n".join(l for _, l in lines)))
        header = [h.strip().lower() for h in next(reader)]
        if header != ["id", "x", "y"]:
            raise ParseError("CSV header must be id,x,y", lines[0][0])
        rows = [(lines[k + 1][0], r) for k, r in enumerate(reader)]
    else:
        rows = [(i, l.split()) for i, l in lines]
    ids, pts = [], []
    for lineno, fields in rows:
        if len(fields) != 3:
            raise ParseError(f"expected 'id x y', got {len(fields)} fields", lineno)
        try:
            ids.append(int(fields[0]))
            x, y = float(fields[1]), float(fields[2])
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ParseError("non-finite coordinate", lineno)
        pts.append((x, y))
    if len(set(ids)) != len(ids):
        raise ParseError("duplicate point ids")
    return PointSet.from_points(pts, ids)


def format_points(ps) -> str:
    return "".join(f"{i} {x!r} {y!r}\n" for i, (x, y) in zip(ps.ids, ps.points.tolist()))


# -- truth maps --------------------------------------------------------------

def truth_to_record(truth: Mapping[int, int]) -> dict:
    return {"schema": TRUTH_SCHEMA, "pairs": [list(p) for p in MatchingPolicy(truth).pairs()]}


def truth_from_record(doc: Mapping) -> MatchingPolicy:
    if doc.get("schema") != TRUTH_SCHEMA:
        raise ParseError(f"unsupported truth schema {doc.get('schema')!r}")
    return MatchingPolicy((int(a), int(b)) for a, b in doc["pairs"])


# -- match documents ---------------------------------------------------------

def match_document(
    result: MatchResult,
    g_s: Graph,
    parameters: Mapping,
    truth: Mapping[int, int] | None = None,
) -> dict:
    """Serialisable record of a match. ``parameters`` is echoed verbatim."""
    policy = result.policy
    best = result.consensus.best if result.consensus else None
    diagnostics = {
        "sigma_used": result.cfg.sigma,
        "sigma_history": list(result.sigma_history),
        "tries": result.feasible.tries,
        "unit": result.feasible.unit.describe() if result.feasible.unit else None,
        "feasible_set_sizes": result.feasible_sizes,
        "initial_candidates": len(result.feasible.candidates),
        "initial": [list(p) for p in best.initial.pairs()] if best else [],
        "steps": [s.to_dict() for s in best.steps] if best else [],
        "exhausted": [list(e) for e in best.exhausted] if best else [],
    }
    doc = {
        "schema": MATCH_SCHEMA,
        "version": __version__,
        "parameters": dict(parameters),
        "matches": [list(p) for p in policy.pairs()],
        "unmatched": [v for v in g_s.nodes() if v not in policy],
        "diagnostics": diagnostics,
    }
    if truth is not None:
        from .simulate import accuracy

        doc["accuracy"] = accuracy(policy, truth)
    return doc


def validate_match_document(doc: Mapping, g_s: Graph, g_f: Graph) -> list[str]:
    """Replay a match document against its input graphs.

    Checks injectivity and topology consistency of the final matches, the
    unit placement threshold, and that every recorded expansion step was the
    unique feasible path given the matches made before it. Returns a list of
    problems; empty means the document is consistent.
    """
    problems: list[str] = []
    if doc.get("schema") != MATCH_SCHEMA:
        return [f"unsupported schema {doc.get('schema')!r}"]
    pairs = [tuple(p) for p in doc["matches"]]
    if len({f for _, f in pairs}) != len(pairs) or len({s for s, _ in pairs}) != len(pairs):
        problems.append("matches are not injective")
        return problems
    final = dict(pairs)
    if not is_topology_consistent(final, g_s, g_f):
        problems.append("matches are not topology consistent")
    if set(doc["unmatched"]) != set(g_s.nodes()) - set(final):
        problems.append("unmatched list disagrees with matches")
    params = doc["parameters"]
    diag = doc["diagnostics"]
    cfg = ThresholdConfig(
        sigma=diag["sigma_used"],
        alpha=params["alpha"],
        p=params["p"],
        count_mode=params["count_mode"],
    )
    matched = {int(a): int(b) for a, b in diag["initial"]}
    unit = diag["unit"]
    if unit and matched:
        from .matching import TopologyUnit

        u = TopologyUnit(tuple(unit["simplex_a"]), tuple(unit["simplex_b"]), tuple(unit["path"]))
        d = unit_distance(g_s, u.edge_set, g_f, matched, cfg.count_mode)
        if d > cfg.threshold(u.count(cfg.count_mode)):
            problems.append(f"unit distance {d} exceeds threshold")
    for k, step in enumerate(diag["steps"]):
        sub = tuple(step["sub_path"])
        cands = feasible_path_matches(g_s, g_f, sub, matched[sub[0]], matched, cfg)
        if len(cands) != 1 or list(cands[0].full_path) != step["full_path"]:
            problems.append(f"step {k} does not replay to a unique match")
            break
        if not math.isclose(cands[0].residual, step["residual"], rel_tol=1e-9, abs_tol=1e-15):
            problems.append(f"step {k} residual differs")
        matched.update(zip(sub[1:], step["full_path"][1:]))
    else:
        if matched != final:
            problems.append("replayed steps do not reproduce the final matches")
    return problems


def write_json(doc, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")


def read_json(path) -> dict:
    return _load_json(Path(path).read_text())
