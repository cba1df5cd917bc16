"""Exact kd-tree index, the charger kNN graph and nearest-feature queries."""
from __future__ import annotations

import bisect
import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .geo import (Polygon, Polyline, euclidean_distance,
                  point_in_polygon, point_to_polyline_distance, ring_distance)
from .ingest import POINT, VectorLayer

LEAF_SIZE = 8


class Neighbors(list):
    """``(id, distance)`` pairs, nearest first.

    ``truncated`` is set when fewer than ``k`` candidates existed.
    """

    truncated = False


class KDTree:
    """Balanced 2-d tree over (id, point) pairs.

    Splits alternate between easting and northing at the median; leaves hold
    up to ``LEAF_SIZE`` points. Queries are exact and break distance ties by
    id, so results do not depend on insertion order.
    """

    def __init__(self, points: Sequence[Tuple[Hashable, Sequence[float]]]):
        if not points:
            raise ValueError("cannot index an empty point set")
        self.ids = [p[0] for p in points]
        self.xs = [float(p[1][0]) for p in points]
        self.ys = [float(p[1][1]) for p in points]
        for x, y in zip(self.xs, self.ys):
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"non-finite coordinate ({x}, {y})")
        # node arrays; leaves have axis == -1 and [lo, hi) into self.order
        self._axis: List[int] = []
        self._split: List[float] = []
        self._left: List[int] = []
        self._right: List[int] = []
        self.order = list(range(len(points)))
        self._build(0, len(points), 0)

    def __len__(self):
        return len(self.ids)

    def _new(self, axis, split, left, right):
        self._axis.append(axis)
        self._split.append(split)
        self._left.append(left)
        self._right.append(right)
        return len(self._axis) - 1

    def _build(self, lo: int, hi: int, depth: int) -> int:
        if hi - lo <= LEAF_SIZE:
            return self._new(-1, 0.0, lo, hi)
        axis = depth % 2
        coord = self.xs if axis == 0 else self.ys
        seg = sorted(self.order[lo:hi], key=coord.__getitem__)
        self.order[lo:hi] = seg
        mid = (lo + hi) // 2
        node = self._new(axis, coord[seg[mid - lo]], -1, -1)
        left = self._build(lo, mid, depth + 1)
        right = self._build(mid, hi, depth + 1)
        self._left[node] = left
        self._right[node] = right
        return node

    def query(self, q: Sequence[float], k: int,
              exclude: Optional[Hashable] = None) -> Neighbors:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        qx, qy = float(q[0]), float(q[1])
        best: List[Tuple[float, Hashable, int]] = []
        xs, ys, ids, order = self.xs, self.ys, self.ids, self.order
        axes, splits = self._axis, self._split
        lefts, rights = self._left, self._right

        def visit(node):
            axis = axes[node]
            if axis < 0:
                for j in order[lefts[node]:rights[node]]:
                    pid = ids[j]
                    if exclude is not None and pid == exclude:
                        continue
                    dx = xs[j] - qx
                    dy = ys[j] - qy
                    item = (dx * dx + dy * dy, pid, j)
                    if len(best) < k:
                        bisect.insort(best, item)
                    elif item < best[-1]:
                        bisect.insort(best, item)
                        best.pop()
                return
            diff = (qx if axis == 0 else qy) - splits[node]
            near, far = ((lefts[node], rights[node]) if diff < 0
                         else (rights[node], lefts[node]))
            visit(near)
            if len(best) < k or diff * diff <= best[-1][0]:
                visit(far)

        visit(0)
        out = Neighbors((pid, math.sqrt(d2)) for d2, pid, _ in best)
        out.truncated = len(out) < k
        return out


def build_index(points: Sequence[Tuple[Hashable, Sequence[float]]]) -> KDTree:
    return KDTree(points)


def knn_query(index: KDTree, q: Sequence[float], k: int,
              exclude: Optional[Hashable] = None) -> Neighbors:
    return index.query(q, k, exclude)


def brute_force_knn(points: Sequence[Tuple[Hashable, Sequence[float]]],
                    q: Sequence[float], k: int,
                    exclude: Optional[Hashable] = None) -> List[Tuple]:
    cand = []
    for pid, p in points:
        if exclude is not None and pid == exclude:
            continue
        dx, dy = p[0] - q[0], p[1] - q[1]
        cand.append((dx * dx + dy * dy, pid))
    cand.sort()
    return [(pid, math.sqrt(d2)) for d2, pid in cand[:k]]


@dataclass(frozen=True)
class KnnGraph:
    k: int
    nodes: Tuple[str, ...]
    edges: Mapping[str, Tuple[Tuple[str, float], ...]]

    @property
    def n_edges(self) -> int:
        return sum(len(v) for v in self.edges.values())

    def edge_list(self, symmetrize: bool = False) -> List[Tuple[str, str, float]]:
        if not symmetrize:
            return [(src, dst, d) for src in self.nodes
                    for dst, d in self.edges[src]]
        seen: Dict[Tuple[str, str], float] = {}
        for src in self.nodes:
            for dst, d in self.edges[src]:
                seen.setdefault((min(src, dst), max(src, dst)), d)
        return [(a, b, d) for (a, b), d in sorted(seen.items())]


def build_knn_graph(points: Sequence[Tuple[str, Sequence[float]]], k: int = 5,
                    threads: int = 1) -> KnnGraph:
    """Directed graph linking every node to its k nearest other nodes."""
    if len(points) < 2:
        raise ValueError("a kNN graph needs at least 2 nodes")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ids = [p[0] for p in points]
    if len(set(ids)) != len(ids):
        raise ValueError("node ids must be unique")
    index = KDTree(points)
    kk = min(k, len(points) - 1)
    ordered = sorted(points, key=lambda p: p[0])

    def job(p):
        return p[0], tuple(index.query(p[1], kk, exclude=p[0]))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, ordered))
    else:
        results = [job(p) for p in ordered]
    return KnnGraph(k, tuple(r[0] for r in results), dict(results))


def neighborhood_mean(graph: KnnGraph, values: Mapping[str, float]
                      ) -> Dict[str, float]:
    out = {}
    for node in graph.nodes:
        nbrs = graph.edges[node]
        missing = [dst for dst, _ in nbrs if dst not in values]
        if missing:
            raise KeyError(f"no value for node(s) {', '.join(missing)}")
        out[node] = (math.fsum(values[dst] for dst, _ in nbrs) / len(nbrs)
                     if nbrs else float("nan"))
    return out


def edges_csv(graph: KnnGraph, symmetrize: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["src", "dst", "distance_m"])
    for src, dst, d in graph.edge_list(symmetrize):
        w.writerow([src, dst, f"{d:.6f}"])
    return buf.getvalue()


def edges_geojson(graph: KnnGraph, coords: Mapping[str, Sequence[float]],
                  symmetrize: bool = False, projected: bool = True) -> dict:
    doc = {"type": "FeatureCollection", "features": [
        {"type": "Feature",
         "properties": {"src": s, "dst": d, "distance_m": round(dist, 6)},
         "geometry": {"type": "LineString",
                      "coordinates": [list(coords[s]), list(coords[d])]}}
        for s, d, dist in graph.edge_list(symmetrize)]}
    if projected:
        doc["crs"] = {"type": "name", "properties": {
            "name": "urn:ogc:def:crs:EPSG::27700"}}
    return doc


# --------------------------------------------------------------------------
# Nearest-feature distances

def nearest_feature_distance(q: Sequence[float], layer: VectorLayer) -> float:
    """Distance from ``q`` to the closest feature of ``layer`` (0 if inside)."""
    if not layer.features:
        raise ValueError(f"layer {layer.name!r} is empty")
    best = math.inf
    for f in layer.features:
        g = f.geometry
        if isinstance(g, Polygon):
            if point_in_polygon(q, g):
                return 0.0
            d = min(ring_distance(q, r) for r in (g.exterior,) + g.holes)
        elif isinstance(g, Polyline):
            d = point_to_polyline_distance(q, g)
        else:
            d = euclidean_distance(q, g)
        if d < best:
            best = d
    return best


class FeatureDistanceIndex:
    """Batch form of ``nearest_feature_distance`` for one layer.

    Point layers go through the kd-tree; line and polygon layers are reduced
    to a flat segment array and scanned with numpy.
    """

    def __init__(self, layer: VectorLayer):
        if not layer.features:
            raise ValueError(f"layer {layer.name!r} is empty")
        self.layer = layer
        self.kind = layer.geometry_kind
        self._tree = None
        self._polys: List[Polygon] = []
        if self.kind == POINT:
            self._tree = KDTree([(i, f.geometry)
                                 for i, f in enumerate(layer.features)])
            return
        segs = []
        for f in layer.features:
            g = f.geometry
            if isinstance(g, Polyline):
                segs.extend(g.segments())
            else:
                self._polys.append(g)
                for r in (g.exterior,) + g.holes:
                    segs.extend(zip(r[:-1], r[1:]))
        arr = np.asarray(segs, dtype=np.float64)  # (m, 2, 2)
        self._a = arr[:, 0, :]
        self._d = arr[:, 1, :] - arr[:, 0, :]
        self._len2 = np.einsum("ij,ij->i", self._d, self._d)
        self._bboxes = [p.bbox for p in self._polys]

    def distance(self, q: Sequence[float]) -> float:
        if self._tree is not None:
            return self._tree.query(q, 1)[0][1]
        for poly, (x0, y0, x1, y1) in zip(self._polys, self._bboxes):
            if x0 <= q[0] <= x1 and y0 <= q[1] <= y1 and point_in_polygon(q, poly):
                return 0.0
        p = np.array([q[0], q[1]], dtype=np.float64) - self._a
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.einsum("ij,ij->i", p, self._d) / self._len2
        t = np.where(self._len2 > 0, np.clip(t, 0.0, 1.0), 0.0)
        r = p - t[:, None] * self._d
        return float(np.sqrt(np.min(np.einsum("ij,ij->i", r, r))))

    def contains(self, q: Sequence[float]) -> bool:
        """True iff ``q`` lies in (or on) any polygon of the layer."""
        for poly, (x0, y0, x1, y1) in zip(self._polys, self._bboxes):
            if x0 <= q[0] <= x1 and y0 <= q[1] <= y1 and point_in_polygon(q, poly):
                return True
        return False
