"""Report statistics over scored chargers.

Functions here take either RiskVectors, objects carrying a ``.risk``
attribute, mappings of factor -> bit, or a ready n x 5 array.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .geo import point_in_polygon
from .ingest import POLYGON, VectorLayer
from .raster import percentile
from .risk import CLASS_LOW_MAX, CLASS_MODERATE_MAX, COMPOSITE

LABELS = {
    "flood": "Flood Risk",
    "lst": "LST Risk",
    "grid": "Grid Risk",
    "road": "Road Risk",
    "vegetation": "Vegetation Risk",
}
SHORT = {"flood": "Flood", "lst": "LST", "grid": "Grid", "road": "Road",
         "vegetation": "Vegetation"}
DEFAULT_COMBOS = (
    ("flood", "lst"),
    ("flood", "vegetation"),
    ("lst", "vegetation"),
    ("grid", "road"),
    ("flood", "lst", "vegetation"),
)
HEX_CELL_M = 10000.0
KDE_POINTS = 256


def risk_matrix(items, factors: Sequence[str] = COMPOSITE) -> np.ndarray:
    if isinstance(items, np.ndarray):
        m = items.astype(np.int64)
        if m.ndim != 2 or m.shape[1] != len(factors):
            raise ValueError(f"expected an n x {len(factors)} array")
        return m
    rows = []
    for it in items:
        r = getattr(it, "risk", it)
        if isinstance(r, Mapping):
            rows.append([int(r[f]) for f in factors])
        else:
            rows.append([int(getattr(r, f)) for f in factors])
    return np.array(rows, dtype=np.int64).reshape(len(rows), len(factors))


def pct_half_up(count: int, n: int) -> float:
    """100 * count / n rounded half-up to one decimal, in exact arithmetic."""
    tenths = math.floor(Fraction(1000 * count, n) + Fraction(1, 2))
    return tenths / 10


@dataclass(frozen=True)
class SummaryRow:
    label: str
    high: int
    low: int
    high_pct: float


@dataclass(frozen=True)
class SummaryTable:
    n: int
    rows: Tuple[SummaryRow, ...]

    def row(self, label: str) -> SummaryRow:
        return next(r for r in self.rows if r.label == label)

    def as_dicts(self) -> List[dict]:
        return [{"label": r.label, "high": r.high, "low": r.low,
                 "high_pct": r.high_pct} for r in self.rows]


def _row(label, high, n):
    return SummaryRow(label, int(high), int(n - high), pct_half_up(int(high), n))


def risk_summary(chargers) -> SummaryTable:
    m = risk_matrix(chargers)
    n = m.shape[0]
    if n == 0:
        raise ValueError("no scored chargers")
    rows = [_row(LABELS[f], m[:, j].sum(), n) for j, f in enumerate(COMPOSITE)]
    rows.append(_row("At least 1 Risk", (m.sum(axis=1) > 0).sum(), n))
    return SummaryTable(n, tuple(rows))


def combo_label(combo: Sequence[str]) -> str:
    return " ∩ ".join(SHORT[f] for f in combo)


def risk_intersections(chargers, combos=DEFAULT_COMBOS) -> SummaryTable:
    for combo in combos:
        for f in combo:
            if f not in COMPOSITE:
                raise ValueError(f"unknown risk factor {f!r}")
    m = risk_matrix(chargers)
    n = m.shape[0]
    if n == 0:
        raise ValueError("no scored chargers")
    rows = []
    for combo in combos:
        cols = [COMPOSITE.index(f) for f in combo]
        rows.append(_row(combo_label(combo), m[:, cols].all(axis=1).sum(), n))
    return SummaryTable(n, tuple(rows))


def risk_count_distribution(chargers) -> List[int]:
    m = risk_matrix(chargers)
    counts = np.bincount(m.sum(axis=1), minlength=len(COMPOSITE) + 1)
    return [int(c) for c in counts]


def correlation_matrix(chargers) -> List[List[Optional[float]]]:
    """Pearson correlations between indicator columns (phi for binaries).

    Entries involving a constant column are None.
    """
    m = risk_matrix(chargers).astype(np.float64)
    k = m.shape[1]
    xc = m - m.mean(axis=0)
    ss = np.einsum("ij,ij->j", xc, xc)
    out: List[List[Optional[float]]] = [[None] * k for _ in range(k)]
    for i in range(k):
        if ss[i] == 0:
            continue
        out[i][i] = 1.0
        for j in range(i + 1, k):
            if ss[j] == 0:
                continue
            r = float(xc[:, i] @ xc[:, j] / math.sqrt(ss[i] * ss[j]))
            r = min(1.0, max(-1.0, r))
            out[i][j] = out[j][i] = r
    return out


# --------------------------------------------------------------------------
# Hexagonal binning (pointy-top axial coordinates, origin at grid 0,0)

@dataclass(frozen=True)
class HexCell:
    q: int
    r: int
    center: Tuple[float, float]
    count: int
    mean_score: float

    def corners(self, size: float) -> List[Tuple[float, float]]:
        cx, cy = self.center
        pts = []
        for i in range(6):
            ang = math.radians(60 * i - 30)
            pts.append((cx + size * math.cos(ang), cy + size * math.sin(ang)))
        pts.append(pts[0])
        return pts


def cube_round(fq: float, fr: float) -> Tuple[int, int]:
    fs = -fq - fr
    q, r, s = round(fq), round(fr), round(fs)
    dq, dr, ds = abs(q - fq), abs(r - fr), abs(s - fs)
    if dq > dr and dq > ds:
        q = -r - s
    elif dr > ds:
        r = -q - s
    return int(q), int(r)


def hex_of(x: float, y: float, size: float) -> Tuple[int, int]:
    fq = (math.sqrt(3) / 3 * x - y / 3) / size
    fr = (2.0 / 3.0 * y) / size
    return cube_round(fq, fr)


def hex_center(q: int, r: int, size: float) -> Tuple[float, float]:
    return (size * math.sqrt(3) * (q + r / 2), size * 1.5 * r)


def hexbin_aggregate(points: Sequence[Sequence[float]], scores: Sequence[float],
                     cell_size: float = HEX_CELL_M) -> List[HexCell]:
    """Bin points into hexagons of circumradius ``cell_size`` metres."""
    if not cell_size > 0:
        raise ValueError("cell_size must be > 0")
    if len(points) != len(scores):
        raise ValueError("points and scores differ in length")
    bins: Dict[Tuple[int, int], List[float]] = {}
    for p, s in zip(points, scores):
        bins.setdefault(hex_of(p[0], p[1], cell_size), []).append(s)
    return [HexCell(q, r, hex_center(q, r, cell_size), len(v),
                    math.fsum(v) / len(v))
            for (q, r), v in sorted(bins.items())]


# --------------------------------------------------------------------------
# District aggregation

@dataclass(frozen=True)
class LadSummary:
    lad_id: str
    lad_name: str
    station_count: int
    mean_rseri: float


@dataclass
class LadReport:
    ranking: List[LadSummary]
    unassigned: int
    assignment: Dict[str, Optional[str]] = field(default_factory=dict)

    def top(self, n: int = 5) -> List[LadSummary]:
        return self.ranking[:n]

    def bottom(self, n: int = 5) -> List[LadSummary]:
        return self.ranking[-n:][::-1] if n else []


def _lad_keys(props: Mapping, index: int) -> Tuple[str, str]:
    lad_id = next((props[k] for k in ("id", "code", "lad_id", "LAD23CD",
                                      "lad_code") if props.get(k) is not None),
                  None)
    name = next((props[k] for k in ("name", "lad_name", "LAD23NM")
                 if props.get(k) is not None), None)
    lad_id = str(lad_id if lad_id is not None else name if name is not None
                 else f"LAD{index}")
    return lad_id, str(name if name is not None else lad_id)


def lad_aggregate(stations: Sequence[Tuple[str, Sequence[float], float]],
                  lad_layer: VectorLayer) -> LadReport:
    """Join (id, point, score) triples to district polygons.

    A station on a shared boundary goes to the first district in layer
    order. Ranking is by mean score descending, then name.
    """
    if lad_layer.features and lad_layer.geometry_kind != POLYGON:
        raise ValueError("LAD layer must contain polygons")
    polys = []
    names: Dict[str, str] = {}
    for i, f in enumerate(lad_layer.features):
        lad_id, name = _lad_keys(f.properties, i)
        names.setdefault(lad_id, name)
        polys.append((lad_id, f.geometry, f.geometry.bbox))

    scores: Dict[str, List[float]] = {}
    assignment: Dict[str, Optional[str]] = {}
    unassigned = 0
    for sid, p, score in stations:
        hit = None
        for lad_id, poly, (x0, y0, x1, y1) in polys:
            if x0 <= p[0] <= x1 and y0 <= p[1] <= y1 and point_in_polygon(p, poly):
                hit = lad_id
                break
        assignment[sid] = hit
        if hit is None:
            unassigned += 1
        else:
            scores.setdefault(hit, []).append(score)

    ranking = [LadSummary(lid, names[lid], len(v), math.fsum(v) / len(v))
               for lid, v in scores.items()]
    ranking.sort(key=lambda s: (-s.mean_rseri, s.lad_name, s.lad_id))
    return LadReport(ranking, unassigned, assignment)


# --------------------------------------------------------------------------
# Histogram and KDE

@dataclass
class HistogramKde:
    edges: List[float]
    counts: List[int]
    kde_x: List[float]
    kde_y: List[float]
    bandwidth: Optional[float]
    class_edges: Tuple[float, float]
    warning: Optional[str] = None


def silverman_bandwidth(scores: Sequence[float]) -> float:
    """0.9 * min(sd, IQR / 1.34) * n^(-1/5).

    Falls back to the standard deviation when the IQR collapses to zero
    while the sample still has spread.
    """
    n = len(scores)
    sd = float(np.std(np.asarray(scores, dtype=np.float64), ddof=1))
    iqr = percentile(scores, 0.75) - percentile(scores, 0.25)
    spread = min(sd, iqr / 1.34) if iqr > 0 else sd
    return 0.9 * spread * n ** (-0.2)


def gaussian_kde(scores: Sequence[float], h: float, x) -> np.ndarray:
    s = np.asarray(scores, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    z = (x[:, None] - s[None, :]) / h
    return np.exp(-0.5 * z * z).sum(axis=1) / (len(s) * h * math.sqrt(2 * math.pi))


def histogram(scores: Sequence[float], bins: int) -> Tuple[List[float], List[int]]:
    if bins < 1:
        raise ValueError("bins must be >= 1")
    counts = [0] * bins
    for v in scores:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"score {v} outside [0, 1]")
        counts[min(int(math.floor(v * bins)), bins - 1)] += 1
    return [i / bins for i in range(bins + 1)], counts


def score_histogram_kde(scores: Sequence[float], bins: int = 20,
                        class_edges: Tuple[float, float] = (CLASS_LOW_MAX,
                                                            CLASS_MODERATE_MAX),
                        points: int = KDE_POINTS) -> HistogramKde:
    edges, counts = histogram(scores, bins)
    out = HistogramKde(edges, counts, [], [], None, tuple(class_edges))
    if len(scores) < 2:
        out.warning = "fewer than 2 scores; KDE skipped"
        return out
    h = silverman_bandwidth(scores)
    if h <= 0:
        out.warning = "zero spread in scores; KDE skipped"
        out.bandwidth = 0.0
        return out
    xs = np.linspace(0.0, 1.0, points)
    out.bandwidth = h
    out.kde_x = [float(v) for v in xs]
    out.kde_y = [float(v) for v in gaussian_kde(scores, h, xs)]
    return out
