"""Point sets to Delaunay graphs, crop/rotate transforms, and the image-style
case study on synthetic keypoints."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInput
from .graph import Graph, build_graph
from .matching import MatchingPolicy, ThresholdConfig
from .pipeline import match_graphs
from .rng import make_rng

log = logging.getLogger(__name__)

_SUPER_SCALE = 1e4
_JITTER = 1e-9


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray  # (n, 2) pixel coordinates
    ids: tuple[int, ...]

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if len(self.ids) != len(pts):
            raise ValueError("ids and points differ in length")
        if not np.all(np.isfinite(pts)):
            raise DegenerateInput("non-finite coordinates")
        if len({tuple(p) for p in pts.tolist()}) != len(pts):
            raise DegenerateInput("duplicate points")

    @classmethod
    def from_points(cls, points, ids: Sequence[int] | None = None) -> PointSet:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return cls(pts, tuple(range(len(pts))) if ids is None else tuple(int(i) for i in ids))

    def __len__(self):
        return len(self.points)


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _incircle(a, b, c, d) -> float:
    """Positive when ``d`` lies inside the circumcircle of CCW triangle ``abc``."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    return (adx * (bdy * cd - bd * cdy)
            - ady * (bdx * cd - bd * cdx)
            + ad * (bdx * cdy - bdy * cdx))


class _Cocircular(Exception):
    pass


def _bowyer_watson(pts: np.ndarray, strict: bool) -> list[tuple[int, int, int]]:
    n = len(pts)
    verts = [tuple(p) for p in pts.tolist()]
    m = _SUPER_SCALE
    verts += [(-3 * m, -3 * m), (3 * m, -3 * m), (0.0, 3 * m)]
    tris: set[tuple[int, int, int]] = {(n, n + 1, n + 2)}
    for i in range(n):
        p = verts[i]
        bad = []
        for t in tris:
            s = _incircle(verts[t[0]], verts[t[1]], verts[t[2]], p)
            if s > 0:
                bad.append(t)
            elif s == 0 and strict and max(t) < n:
                raise _Cocircular
        edge_uses: dict[tuple[int, int], int] = {}
        for a, b, c in bad:
            for e in ((a, b), (b, c), (c, a)):
                key = (min(e), max(e))
                edge_uses[key] = edge_uses.get(key, 0) + 1
        for t in bad:
            tris.discard(t)
        for a, b, c in bad:
            for u, v in ((a, b), (b, c), (c, a)):
                if edge_uses[(min(u, v), max(u, v))] == 1:
                    tris.add((u, v, i))
    return _repair([p for p in verts[:n]], {t for t in tris if max(t) < n})


def _ccw(t, verts):
    a, b, c = t
    return t if _orient(verts[a], verts[b], verts[c]) > 0 else (a, c, b)


def _boundary(tris) -> dict[int, list[int]]:
    directed = {(t[i], t[(i + 1) % 3]) for t in tris for i in range(3)}
    nxt: dict[int, list[int]] = {}
    for u, v in directed:
        if (v, u) not in directed:
            nxt.setdefault(u, []).append(v)
    return nxt


def _inside(tri, q, verts) -> bool:
    a, b, c = (verts[i] for i in tri)
    return _orient(a, b, q) >= 0 and _orient(b, c, q) >= 0 and _orient(c, a, q) >= 0


def _repair(verts, tris) -> list[tuple[int, int, int]]:
    """Complete the hull and restore the empty-circle property.

    A finite enclosing triangle can swallow real hull triangles whose
    circumcircles are huge; concave boundary pockets are closed with ears and
    then Lawson flips settle the result.
    """
    tris = {_ccw(t, verts) for t in tris}
    changed = True
    while changed:
        changed = False
        nxt = _boundary(tris)
        for a, outs in sorted(nxt.items()):
            if len(outs) != 1 or len(nxt.get(outs[0], ())) != 1:
                continue
            b = outs[0]
            c = nxt[b][0]
            if c == a or _orient(verts[a], verts[b], verts[c]) >= 0:
                continue
            ear = (a, c, b)
            if any(_inside(ear, verts[q], verts) for q in range(len(verts)) if q not in ear):
                continue
            tris.add(ear)
            changed = True
            break
    flipped = True
    while flipped:
        flipped = False
        owner = {}
        for t in tris:
            for i in range(3):
                owner[(t[i], t[(i + 1) % 3])] = t
        for (u, v), t in sorted(owner.items()):
            other = owner.get((v, u))
            if other is None or u > v:
                continue
            w = next(x for x in t if x not in (u, v))
            x = next(y for y in other if y not in (u, v))
            if _incircle(*(verts[i] for i in t), verts[x]) > 0:
                tris.discard(t)
                tris.discard(other)
                tris.add(_ccw((w, x, v), verts))
                tris.add(_ccw((w, u, x), verts))
                flipped = True
                break
    return sorted(tuple(sorted(t)) for t in tris)


def delaunay_triangles(ps: PointSet, seed: int = 0) -> list[tuple[int, int, int]]:
    """Delaunay triangles of ``ps`` as sorted index triples (indices into ``ps``).

    Points are inserted in lexicographic (x, y) order after normalisation to
    the unit box. Exactly cocircular quadruples trigger a seeded perturbation
    of at most 1e-9 (normalised units) and a rebuild.
    """
    n = len(ps)
    if n < 3:
        raise DegenerateInput("need at least 3 points")
    pts = ps.points
    lo = pts.min(axis=0)
    span = float((pts.max(axis=0) - lo).max())
    norm = (pts - lo) / span
    sv = np.linalg.svd(norm - norm.mean(axis=0), compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0]:
        raise DegenerateInput("all points are collinear")
    order = sorted(range(n), key=lambda i: (pts[i, 0], pts[i, 1]))
    sorted_pts = norm[order]
    try:
        local = _bowyer_watson(sorted_pts, strict=True)
    except _Cocircular:
        log.info("cocircular points found; perturbing by <= %g and rebuilding", _JITTER)
        rng = make_rng(seed, 7)
        jitter = rng.uniform(-_JITTER, _JITTER, size=sorted_pts.shape)
        local = _bowyer_watson(sorted_pts + jitter, strict=False)
        # slivers along collinear hull runs have no area before the jitter
        local = [t for t in local if abs(_orient(*(sorted_pts[i] for i in t))) > 1e-12]
    if not local:
        raise DegenerateInput("all points are collinear")
    return sorted(tuple(sorted(order[i] for i in t)) for t in local)


def triangle_edges(triangles) -> set[tuple[int, int]]:
    edges = set()
    for a, b, c in triangles:
        edges.update({(min(a, b), max(a, b)), (min(b, c), max(b, c)), (min(a, c), max(a, c))})
    return edges


def delaunay_graph(ps: PointSet, seed: int = 0) -> Graph:
    """Delaunay graph of ``ps``; node ``i`` is ``ps.points[i]``, weights are
    Euclidean distances in pixels."""
    pts = ps.points
    edges = triangle_edges(delaunay_triangles(ps, seed))
    return build_graph(
        ((u, v, math.dist(pts[u], pts[v])) for u, v in sorted(edges)), node_count=len(ps)
    )


def transform_points(
    ps: PointSet,
    rotation_deg: float = 0.0,
    crop: tuple[float, float, float, float] | None = None,
) -> tuple[PointSet, list[int]]:
    """Crop to ``(xmin, ymin, xmax, ymax)`` (inclusive) and rotate about the
    crop centre.

    Positive angles turn clockwise on screen (image coordinates, y down).
    Returns the new point set (ids preserved) and, for each new index, the
    index of its source point in ``ps``.
    """
    pts = ps.points
    if crop is None:
        crop = (*pts.min(axis=0), *pts.max(axis=0))
    xmin, ymin, xmax, ymax = map(float, crop)
    if not (xmin <= xmax and ymin <= ymax):
        raise ValueError(f"invalid crop rectangle {crop}")
    inside = (pts[:, 0] >= xmin) & (pts[:, 0] <= xmax) & (pts[:, 1] >= ymin) & (pts[:, 1] <= ymax)
    index_map = np.flatnonzero(inside).tolist()
    if not index_map:
        raise DegenerateInput("crop rectangle contains no points")
    cx, cy = (xmin + xmax) / 2.0, (ymin + ymax) / 2.0
    theta = math.radians(rotation_deg)
    cos, sin = math.cos(theta), math.sin(theta)
    sel = pts[index_map] - (cx, cy)
    rotated = np.column_stack(
        (cx + sel[:, 0] * cos - sel[:, 1] * sin, cy + sel[:, 0] * sin + sel[:, 1] * cos)
    )
    return PointSet(rotated, tuple(ps.ids[i] for i in index_map)), index_map


def interior_nodes(g_full: Graph, g_crop: Graph, index_map: Sequence[int]) -> list[int]:
    """Crop nodes whose incident edges are exactly those of their source node."""
    out = []
    for i in g_crop.nodes():
        mapped = {index_map[j] for j in g_crop.neighbors(i)}
        if mapped == set(g_full.neighbors(index_map[i])):
            out.append(i)
    return out


def crop_window(ps: PointSet, center: Sequence[float], count: int) -> tuple[float, float, float, float]:
    """Smallest centred square holding the ``count`` points nearest in the
    Chebyshev metric."""
    if count > len(ps):
        raise ValueError("window larger than point set")
    d = np.abs(ps.points - np.asarray(center, dtype=float)).max(axis=1)
    half = float(np.sort(d)[count - 1])
    cx, cy = center
    return (cx - half, cy - half, cx + half, cy + half)


def synthetic_points(n: int, rng: np.random.Generator, width: float = 640.0, height: float = 480.0) -> PointSet:
    pts = np.column_stack((rng.uniform(0, width, n), rng.uniform(0, height, n)))
    return PointSet.from_points(pts)


@dataclass
class CaseStudyResult:
    full: PointSet
    crop: PointSet
    index_map: list[int]
    g_full: Graph
    g_crop: Graph
    policy: MatchingPolicy
    interior: list[int]

    @property
    def interior_accuracy(self) -> float:
        if not self.interior:
            return 0.0
        hits = sum(1 for i in self.interior if self.policy.get(i) == self.index_map[i])
        return hits / len(self.interior)

    @property
    def wrong(self) -> int:
        return sum(1 for i, f in self.policy.items() if f != self.index_map[i])


def case_study(
    n_points: int = 80,
    window: int = 25,
    rotation_deg: float = 30.0,
    sigma: float = 1.0,
    alpha: float = 0.025,
    jitter: float = 0.0,
    seed: int = 0,
    n_tries: int = 30,
) -> CaseStudyResult:
    """Match a cropped, rotated Delaunay graph back into the full one.

    ``jitter`` adds N(0, jitter^2) pixel noise to the cropped keypoints.
    """
    rng = make_rng(seed, 0)
    full = synthetic_points(n_points, rng)
    center = full.points.mean(axis=0)
    rect = crop_window(full, center, window)
    crop, index_map = transform_points(full, rotation_deg, rect)
    if jitter > 0:
        crop = PointSet(crop.points + rng.normal(0.0, jitter, crop.points.shape), crop.ids)
    g_full = delaunay_graph(full, seed)
    g_crop = delaunay_graph(crop, seed)
    cfg = ThresholdConfig(sigma=sigma, alpha=alpha)
    result = match_graphs(g_crop, g_full, cfg, n_tries=n_tries, seed=seed)
    return CaseStudyResult(
        full, crop, index_map, g_full, g_crop, result.policy,
        interior_nodes(g_full, g_crop, index_map),
    )
