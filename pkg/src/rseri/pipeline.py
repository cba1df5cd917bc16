"""End-to-end runs: validate inputs, score chargers, build the report."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .analytics import (correlation_matrix, hexbin_aggregate,
                        lad_aggregate, risk_count_distribution,
                        risk_intersections, risk_summary, score_histogram_kde)
from .config import PipelineConfig
from .geo import unproject_bng_to_wgs84, ProjectedPoint
from .ingest import (POLYGON, POLYLINE, ChargerStation, IngestError,
                     LoadedChargers, RasterGrid, VectorLayer, load_chargers,
                     parse_ascii_grid, parse_geojson, parse_legend)
from .raster import (classify_lulc, classify_ndvi, lst_composite, percentile,
                     sample_raster)
from .risk import (COMPOSITE, INDICATORS, RiskVector,
                   WeightScheme, classify_rseri, grid_indicator, lst_indicator,
                   lulc_indicator, ndvi_indicator, pca_weights,
                   road_indicator, rseri_value, vegetation_indicator)
from .spatial import (FeatureDistanceIndex, build_knn_graph, edges_csv,
                      edges_geojson, neighborhood_mean)

log = logging.getLogger(__name__)

SCORED_CSV = "chargers_scored.csv"
SCORED_GEOJSON = "chargers_scored.geojson"
EDGES_CSV = "graph_edges.csv"
EDGES_GEOJSON = "graph_edges.geojson"
EXCLUDED_CSV = "excluded.csv"
MANIFEST = "manifest.json"
TIMINGS = "timings.json"
REPORT_JSON = "report.json"

SCORED_COLUMNS = (
    ["id", "lon", "lat", "easting", "northing"]
    + list(INDICATORS)
    + ["lst_value", "lst_median", "ndvi_value", "lulc_code", "lulc_category",
       "substation_dist_m", "road_dist_m", "rseri_risk", "resilience",
       "rseri_class", "lad_id", "nbr_mean_rseri"]
)


class PipelineError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# small IO helpers

def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_atomic(path: Path, data) -> str:
    """Write via a temp file + rename; returns the sha256 of the bytes."""
    raw = data.encode("utf-8") if isinstance(data, str) else data
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return sha256_bytes(raw)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _f(v, places: int) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return ""
    return f"{v:.{places}f}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# --------------------------------------------------------------------------
# inputs

@dataclass
class Inputs:
    chargers: LoadedChargers
    flood: VectorLayer
    substations: VectorLayer
    roads: VectorLayer
    lads: Optional[VectorLayer]
    lst: List[RasterGrid]
    ndvi: RasterGrid
    lulc: RasterGrid
    legend: Dict[int, str]
    digests: Dict[str, str] = field(default_factory=dict)


def _read(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        raise IngestError(f"cannot read file ({exc.strerror})", str(path)
                          ) from exc


def _parse(path: Path, fn, *args, **kw):
    raw = _read(path)
    try:
        return fn(raw, *args, **kw), sha256_bytes(raw)
    except IngestError as exc:
        raise IngestError(str(exc), str(path)) from exc


EXPECTED_KIND = {"flood": POLYGON, "roads": POLYLINE, "lads": POLYGON}


def load_inputs(cfg: PipelineConfig, errors: Optional[list] = None) -> Optional[Inputs]:
    """Parse every configured input.

    With ``errors`` given, problems are appended there and parsing carries on
    so that one run lists all of them; otherwise the first one raises.
    """
    collect = errors is not None
    loaded = {}
    digests = {}
    layer_crs = cfg.get("layer_crs")

    def attempt(key, path, fn, *args, **kw):
        try:
            value, digest = _parse(path, fn, *args, **kw)
        except IngestError as exc:
            if not collect:
                raise
            errors.append(f"{key}: {exc}")
            return None
        digests[key] = digest
        return value

    for key, fn, args in (
            ("chargers", load_chargers,
             (cfg.get("inputs.chargers_format"), cfg.get("crs"))),
            ("flood", parse_geojson, ("flood", layer_crs)),
            ("substations", parse_geojson, ("substations", layer_crs)),
            ("roads", parse_geojson, ("roads", layer_crs)),
            ("lads", parse_geojson, ("lads", layer_crs)),
            ("ndvi", parse_ascii_grid, ()),
            ("lulc", parse_ascii_grid, ()),
            ("legend", parse_legend, ())):
        path = cfg.path(key)
        if path is None:
            loaded[key] = None
            continue
        loaded[key] = attempt(key, path, fn, *args)
    lst = []
    for i, path in enumerate(cfg.lst_paths()):
        grid = attempt(f"lst[{i}]", path, parse_ascii_grid)
        lst.append(grid)

    for key, kind in EXPECTED_KIND.items():
        layer = loaded.get(key)
        if layer is not None and layer.features and layer.geometry_kind != kind:
            msg = f"{key}: expected {kind} features, got {layer.geometry_kind}"
            if not collect:
                raise IngestError(msg)
            errors.append(msg)
    if collect and (errors or any(g is None for g in lst)):
        return None
    return Inputs(loaded["chargers"], loaded["flood"], loaded["substations"],
                  loaded["roads"], loaded["lads"], lst, loaded["ndvi"],
                  loaded["lulc"], loaded["legend"], digests)


# --------------------------------------------------------------------------
# validate

@dataclass
class ValidationReport:
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def as_dict(self) -> dict:
        return {"ok": self.ok, "errors": self.errors, "warnings": self.warnings}


def validate(cfg: PipelineConfig) -> ValidationReport:
    rep = ValidationReport()
    rep.errors.extend(cfg.check())
    for key in ("chargers", "flood", "substations", "roads", "lads", "ndvi",
                "lulc", "legend"):
        p = cfg.path(key)
        if p is not None and not p.is_file():
            rep.errors.append(f"{key}: file not found: {p}")
    for i, p in enumerate(cfg.lst_paths()):
        if not p.is_file():
            rep.errors.append(f"lst[{i}]: file not found: {p}")
    if rep.errors:
        return rep

    inputs = load_inputs(cfg, rep.errors)
    if inputs is None:
        return rep

    for key in ("flood", "substations", "roads"):
        layer = getattr(inputs, key)
        if not layer.features:
            msg = f"{key}: layer has no features"
            (rep.warnings if key == "flood" else rep.errors).append(msg)
    ch = inputs.chargers
    if ch.dropped:
        rep.warnings.append(f"chargers: {ch.n_dropped} non-active row(s) dropped")
    for cid in ch.outside_envelope:
        rep.warnings.append(f"chargers: {cid} lies outside the Wales envelope")
    if len(ch.stations) < 2:
        rep.errors.append("chargers: fewer than 2 active stations")

    rasters = [(f"lst[{i}]", g) for i, g in enumerate(inputs.lst)]
    rasters += [("ndvi", inputs.ndvi), ("lulc", inputs.lulc)]
    for name, grid in rasters:
        if grid.all_nodata:
            rep.warnings.append(f"{name}: every cell is nodata")
        for st in ch.stations:
            if sample_raster(grid, st.projected) is None:
                rep.warnings.append(
                    f"{name}: charger {st.id} not covered (outside extent or "
                    f"nodata)")
    vals = inputs.ndvi.valid_values()
    if vals.size and (vals.min() < -1 or vals.max() > 1):
        rep.warnings.append("ndvi: values outside [-1, 1] present")
    codes = set(int(v) for v in np.unique(inputs.lulc.valid_values()))
    unknown = sorted(codes - set(inputs.legend))
    if unknown:
        rep.warnings.append(f"legend: LULC code(s) {unknown} have no entry")
    return rep


# --------------------------------------------------------------------------
# score

@dataclass
class StationResult:
    station: ChargerStation
    excluded: List[str] = field(default_factory=list)


@dataclass
class ScoreResult:
    scored: List[ChargerStation]
    excluded: List[StationResult]
    weights: WeightScheme
    lst_threshold: Optional[float]
    graph: object
    manifest: dict
    out_dir: Path


def _pmap(fn, items, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _sample_station(st: ChargerStation, inputs: Inputs, sub_idx, road_idx,
                    flood_idx) -> ChargerStation:
    q = st.projected
    lst_samples = [sample_raster(g, q) for g in inputs.lst]
    lst_max, lst_median = lst_composite(lst_samples)
    code = sample_raster(inputs.lulc, q)
    st.sampled = {
        "lst_samples": lst_samples,
        "lst": lst_max,
        "lst_median": lst_median,
        "ndvi": sample_raster(inputs.ndvi, q),
        "lulc_code": None if code is None else int(round(code)),
        "substation_dist": sub_idx.distance(q),
        "road_dist": road_idx.distance(q),
        "flood": int(flood_idx.contains(q)) if flood_idx is not None else 0,
    }
    return st


def _indicators(st: ChargerStation, inputs: Inputs, cfg: PipelineConfig,
                threshold: Optional[float]) -> StationResult:
    s = st.sampled
    t = cfg.get("thresholds")
    reasons = []
    ndvi_class = None
    if s["ndvi"] is None:
        reasons.append("ndvi: no raster value")
    elif not -1.0 <= s["ndvi"] <= 1.0:
        reasons.append(f"ndvi: value {s['ndvi']} outside [-1, 1]")
    else:
        ndvi_class = classify_ndvi(s["ndvi"], t["ndvi_low"], t["ndvi_high"])
    category = None
    if s["lulc_code"] is None:
        reasons.append("lulc: no raster value")
    else:
        category = classify_lulc(s["lulc_code"], inputs.legend)
    s["ndvi_class"] = ndvi_class.value if ndvi_class else None
    s["lulc_category"] = category.value if category else None
    if s["lst"] is None:
        reasons.append("lst: no raster value")
    risk = RiskVector(
        flood=s["flood"],
        lst=lst_indicator(s["lst"], threshold) if threshold is not None else None,
        grid=grid_indicator(s["substation_dist"], t["grid_m"]),
        road=road_indicator(s["road_dist"], t["road_m"]),
        ndvi=ndvi_indicator(ndvi_class),
        lulc=lulc_indicator(category),
        vegetation=vegetation_indicator(ndvi_class, category),
    )
    st.risk = risk
    if risk.lst is None and s["lst"] is not None:
        reasons.append("lst: no threshold")
    if not risk.complete:
        missing = sorted(n for n in COMPOSITE if getattr(risk, n) is None)
        reasons.append("missing composite indicator(s): " + ", ".join(missing))
    return StationResult(st, reasons if not risk.complete else [])


def lst_threshold(cfg: PipelineConfig, inputs: Inputs,
                  stations: Sequence[ChargerStation]) -> Optional[float]:
    p = cfg.get("thresholds.lst_percentile")
    if cfg.get("thresholds.lst_population") == "raster":
        pool = [v for g in inputs.lst for v in g.valid_values().tolist()]
    else:
        pool = [st.sampled["lst"] for st in stations
                if st.sampled["lst"] is not None]
    if not pool:
        return None
    return percentile(pool, p)


def _weights(cfg: PipelineConfig, complete: Sequence[ChargerStation]
             ) -> WeightScheme:
    kind = cfg.get("weights.kind")
    if kind == "equal":
        return WeightScheme.equal()
    if kind == "custom":
        return WeightScheme.custom(cfg.custom_weights())
    matrix = [st.risk.composite() for st in complete]
    return pca_weights(matrix)


def scored_rows(stations: Sequence[ChargerStation]) -> List[list]:
    rows = []
    for st in stations:
        s = st.sampled
        r = st.risk.as_dict()
        loc = st.location
        rows.append(
            [st.id, _f(loc.lon if loc else None, 6),
             _f(loc.lat if loc else None, 6),
             _f(st.projected.easting, 6), _f(st.projected.northing, 6)]
            + ["" if r[n] is None else str(r[n]) for n in INDICATORS]
            + [_f(s["lst"], 6), _f(s["lst_median"], 6), _f(s["ndvi"], 6),
               "" if s["lulc_code"] is None else str(s["lulc_code"]),
               s["lulc_category"] or "",
               _f(s["substation_dist"], 6), _f(s["road_dist"], 6),
               _f(st.rseri, 4), _f(None if st.rseri is None else 1 - st.rseri, 4),
               st.rseri_class or "", st.lad_id or "",
               _f(s.get("nbr_mean_rseri"), 4)])
    return rows


def _stations_geojson(stations: Sequence[ChargerStation]) -> dict:
    projected = any(st.location is None for st in stations)
    feats = []
    for st in stations:
        coords = ([round(st.projected.easting, 6), round(st.projected.northing, 6)]
                  if projected else
                  [round(st.location.lon, 6), round(st.location.lat, 6)])
        props = {"id": st.id, **st.risk.as_dict(),
                 "rseri_risk": round(st.rseri, 4),
                 "rseri_class": st.rseri_class, "lad_id": st.lad_id}
        feats.append({"type": "Feature", "properties": props,
                      "geometry": {"type": "Point", "coordinates": coords}})
    doc = {"type": "FeatureCollection", "features": feats}
    if projected:
        doc["crs"] = {"type": "name",
                      "properties": {"name": "urn:ogc:def:crs:EPSG::27700"}}
    return doc


def score(cfg: PipelineConfig, out_dir=None, threads: Optional[int] = None
          ) -> ScoreResult:
    threads = threads or cfg.get("threads")
    out = cfg.output_dir(out_dir)
    timings: Dict[str, float] = {}
    t0 = time.perf_counter()

    inputs = load_inputs(cfg)
    timings["ingest_s"] = time.perf_counter() - t0
    stations = sorted(inputs.chargers.stations, key=lambda s: s.id)
    if len(stations) < 1:
        raise PipelineError("no active chargers to score")

    t1 = time.perf_counter()
    sub_idx = FeatureDistanceIndex(inputs.substations)
    road_idx = FeatureDistanceIndex(inputs.roads)
    flood_idx = (FeatureDistanceIndex(inputs.flood)
                 if inputs.flood.features else None)
    # phase 1: per-station sampling; phase 2 needs the regional threshold
    stations = _pmap(lambda st: _sample_station(st, inputs, sub_idx, road_idx,
                                                flood_idx), stations, threads)
    threshold = lst_threshold(cfg, inputs, stations)
    results = _pmap(lambda st: _indicators(st, inputs, cfg, threshold),
                    stations, threads)
    timings["indicators_s"] = time.perf_counter() - t1

    complete = [r.station for r in results if not r.excluded]
    excluded = [r for r in results if r.excluded]
    for r in excluded:
        log.info("excluded %s: %s", r.station.id, "; ".join(r.excluded))
    if not complete:
        raise PipelineError("every station was excluded for missing data")

    weights = _weights(cfg, complete)
    lo, mid = cfg.get("classes.low_max"), cfg.get("classes.moderate_max")
    for st in complete:
        st.rseri = rseri_value(st.risk.composite(), weights)
        st.rseri_class = classify_rseri(st.rseri, lo, mid)

    t2 = time.perf_counter()
    graph = None
    if len(complete) >= 2:
        graph = build_knn_graph([(st.id, st.projected) for st in complete],
                                cfg.get("graph.k"), threads)
        nbr = neighborhood_mean(graph, {st.id: st.rseri for st in complete})
        for st in complete:
            st.sampled["nbr_mean_rseri"] = nbr[st.id]
    else:
        log.warning("fewer than 2 scored stations; kNN graph skipped")
    timings["graph_s"] = time.perf_counter() - t2

    if inputs.lads is not None and inputs.lads.features:
        lad = lad_aggregate([(st.id, st.projected, st.rseri) for st in complete],
                            inputs.lads)
        for st in complete:
            st.lad_id = lad.assignment.get(st.id)

    outputs: Dict[str, str] = {}
    outputs[SCORED_CSV] = write_atomic(out / SCORED_CSV,
                                       _csv_text(SCORED_COLUMNS,
                                                 scored_rows(complete)))
    outputs[SCORED_GEOJSON] = write_atomic(
        out / SCORED_GEOJSON, dump_json(_stations_geojson(complete)))
    excl_rows = [[r.station.id, "; ".join(r.excluded)] for r in excluded]
    excl_rows += [[cid, f"inactive status {status!r}"]
                  for cid, status in sorted(inputs.chargers.dropped)]
    outputs[EXCLUDED_CSV] = write_atomic(
        out / EXCLUDED_CSV, _csv_text(["id", "reason"], excl_rows))
    if graph is not None:
        sym = bool(cfg.get("graph.symmetrize_export"))
        outputs[EDGES_CSV] = write_atomic(out / EDGES_CSV, edges_csv(graph, sym))
        use_geo = all(st.location is not None for st in complete)
        coords = {st.id: ((round(st.location.lon, 6), round(st.location.lat, 6))
                          if use_geo else
                          (round(st.projected.easting, 6),
                           round(st.projected.northing, 6)))
                  for st in complete}
        outputs[EDGES_GEOJSON] = write_atomic(
            out / EDGES_GEOJSON,
            dump_json(edges_geojson(graph, coords, sym, projected=not use_geo)))

    n_ingested = len(inputs.chargers.stations) + inputs.chargers.n_dropped
    manifest = {
        "tool": "rseri",
        "version": __version__,
        "inputs": {k: {"file": _rel(cfg, k), "sha256": v}
                   for k, v in sorted(inputs.digests.items())},
        "config": cfg.snapshot(),
        "counts": {
            "ingested": n_ingested,
            "active": len(stations),
            "dropped_inactive": inputs.chargers.n_dropped,
            "excluded": len(excluded),
            "scored": len(complete),
            "graph_edges": graph.n_edges if graph is not None else 0,
        },
        "lst_threshold": threshold,
        "weights": {"kind": weights.kind, **weights.as_dict(),
                    **({"pca": weights.info} if weights.info else {})},
        "outputs": dict(sorted(outputs.items())),
        "timings_file": TIMINGS,
    }
    timings["total_s"] = time.perf_counter() - t0
    write_atomic(out / TIMINGS, dump_json({**timings, "threads": threads}))
    write_atomic(out / MANIFEST, dump_json(manifest))
    return ScoreResult(complete, excluded, weights, threshold, graph,
                       manifest, out)


def _rel(cfg: PipelineConfig, key: str) -> str:
    if key.startswith("lst["):
        p = cfg.lst_paths()[int(key[4:-1])]
    else:
        p = cfg.path(key)
    try:
        return str(p.resolve().relative_to(cfg.base_dir.resolve()))
    except ValueError:
        return p.name


# --------------------------------------------------------------------------
# report

@dataclass
class ScoredRecord:
    id: str
    point: ProjectedPoint
    risk: Dict[str, int]
    rseri: float
    rseri_class: str
    lad_id: Optional[str]


def read_scored(path: Path) -> List[ScoredRecord]:
    if not path.is_file():
        raise PipelineError(f"{path} not found; run `rseri score` first")
    out = []
    with path.open(newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(ScoredRecord(
                row["id"],
                ProjectedPoint(float(row["easting"]), float(row["northing"])),
                {f: int(row[f]) for f in COMPOSITE},
                float(row["rseri_risk"]), row["rseri_class"],
                row["lad_id"] or None))
    return out


def read_edges(path: Path):
    if not path.is_file():
        return []
    with path.open(newline="") as fh:
        return [(r["src"], r["dst"], float(r["distance_m"]))
                for r in csv.DictReader(fh)]


def _table_csv(table) -> str:
    return _csv_text(["label", "high", "low", "high_pct"],
                     [[r.label, r.high, r.low, f"{r.high_pct:.1f}"]
                      for r in table.rows])


def _hex_geojson(cells, size: float, to_wgs84: bool) -> dict:
    feats = []
    for c in cells:
        ring = c.corners(size)
        if to_wgs84:
            ring = [unproject_bng_to_wgs84(ProjectedPoint(*p)) for p in ring]
        feats.append({
            "type": "Feature",
            "properties": {"q": c.q, "r": c.r, "count": c.count,
                           "mean_score": round(c.mean_score, 6)},
            "geometry": {"type": "Polygon",
                         "coordinates": [[[round(x, 6), round(y, 6)]
                                          for x, y in ring]]}})
    doc = {"type": "FeatureCollection", "features": feats}
    if not to_wgs84:
        doc["crs"] = {"type": "name",
                      "properties": {"name": "urn:ogc:def:crs:EPSG::27700"}}
    return doc


def _r(v, places=6):
    return None if v is None else round(v, places)


def build_report(records: Sequence[ScoredRecord], cfg: PipelineConfig,
                 lads: Optional[VectorLayer]) -> dict:
    """The report as a plain JSON-ready dict."""
    risks = [r.risk for r in records]
    scores = [r.rseri for r in records]
    summary = risk_summary(risks)
    combos = [tuple(c) for c in (cfg.get("analytics.combos") or [])]
    inter = risk_intersections(risks, combos) if combos else None
    size = float(cfg.get("analytics.hex_cell_m"))
    cells = hexbin_aggregate([r.point for r in records], scores, size)
    class_edges = (cfg.get("classes.low_max"), cfg.get("classes.moderate_max"))
    hk = score_histogram_kde(scores, cfg.get("analytics.hist_bins"), class_edges)
    lad = None
    if lads is not None and lads.features:
        lad = lad_aggregate([(r.id, r.point, r.rseri) for r in records], lads)

    classes = {c: sum(1 for r in records if r.rseri_class == c)
               for c in ("Low", "Moderate", "High")}
    doc = {
        "n_scored": len(records),
        "factors": list(COMPOSITE),
        "risk_summary": summary.as_dicts(),
        "risk_intersections": inter.as_dicts() if inter else None,
        "notices": [] if inter else ["no intersection combos configured; "
                                     "intersections table omitted"],
        "risk_count_distribution": risk_count_distribution(risks),
        "correlation_matrix": [[_r(v, 12) for v in row]
                               for row in correlation_matrix(risks)],
        "class_counts": classes,
        "hexbin": {
            "cell_size_m": size,
            "cells": [{"q": c.q, "r": c.r, "center": [_r(c.center[0]),
                                                      _r(c.center[1])],
                       "count": c.count, "mean_score": _r(c.mean_score)}
                      for c in cells],
        },
        "lad": None if lad is None else {
            "ranking": [{"lad_id": s.lad_id, "lad_name": s.lad_name,
                         "station_count": s.station_count,
                         "mean_rseri": _r(s.mean_rseri)} for s in lad.ranking],
            "top5": [s.lad_id for s in lad.top(5)],
            "bottom5": [s.lad_id for s in lad.bottom(5)],
            "unassigned": lad.unassigned,
        },
        "histogram": {"edges": [_r(e) for e in hk.edges], "counts": hk.counts},
        "kde": {"bandwidth": _r(hk.bandwidth, 9),
                "x": [_r(v) for v in hk.kde_x], "y": [_r(v) for v in hk.kde_y],
                "warning": hk.warning},
        "class_edges": [_r(e, 12) for e in class_edges],
    }
    return doc


def report(cfg: PipelineConfig, out_dir=None) -> dict:
    out = cfg.output_dir(out_dir)
    records = read_scored(out / SCORED_CSV)
    if not records:
        raise PipelineError("scored dataset is empty")
    lads = None
    lad_path = cfg.path("lads")
    if lad_path is not None:
        lads, _ = _parse(lad_path, parse_geojson, "lads", cfg.get("layer_crs"))
    doc = build_report(records, cfg, lads)
    validate_report(doc)

    write_atomic(out / REPORT_JSON, dump_json(doc))
    write_atomic(out / "risk_summary.csv",
                 _table_csv(risk_summary([r.risk for r in records])))
    if doc["risk_intersections"] is not None:
        write_atomic(out / "risk_intersections.csv", _csv_text(
            ["label", "high", "low", "high_pct"],
            [[r["label"], r["high"], r["low"], f"{r['high_pct']:.1f}"]
             for r in doc["risk_intersections"]]))
    else:
        log.warning("no intersection combos configured; table omitted")
    write_atomic(out / "risk_count_distribution.csv", _csv_text(
        ["n_risks", "stations"], list(enumerate(doc["risk_count_distribution"]))))
    write_atomic(out / "correlation_matrix.csv", _csv_text(
        [""] + list(COMPOSITE),
        [[f] + ["" if v is None else f"{v:.6f}" for v in row]
         for f, row in zip(COMPOSITE, doc["correlation_matrix"])]))
    size = doc["hexbin"]["cell_size_m"]
    write_atomic(out / "hexbin_cells.csv", _csv_text(
        ["q", "r", "center_e", "center_n", "count", "mean_score"],
        [[c["q"], c["r"], f"{c['center'][0]:.6f}", f"{c['center'][1]:.6f}",
          c["count"], f"{c['mean_score']:.4f}"] for c in doc["hexbin"]["cells"]]))
    cells = hexbin_aggregate([r.point for r in records],
                             [r.rseri for r in records], size)
    write_atomic(out / "hexbin_cells.geojson",
                 dump_json(_hex_geojson(cells, size, to_wgs84=False)))
    if doc["lad"] is not None:
        write_atomic(out / "lad_ranking.csv", _csv_text(
            ["rank", "lad_id", "lad_name", "station_count", "mean_rseri"],
            [[i + 1, s["lad_id"], s["lad_name"], s["station_count"],
              f"{s['mean_rseri']:.4f}"]
             for i, s in enumerate(doc["lad"]["ranking"])]))
    h = doc["histogram"]
    write_atomic(out / "score_histogram.csv", _csv_text(
        ["bin_lo", "bin_hi", "count"],
        [[f"{lo:.4f}", f"{hi:.4f}", c]
         for lo, hi, c in zip(h["edges"][:-1], h["edges"][1:], h["counts"])]))
    write_atomic(out / "score_kde.csv", _csv_text(
        ["x", "density"],
        [[f"{x:.6f}", f"{y:.6f}"] for x, y in zip(doc["kde"]["x"],
                                                 doc["kde"]["y"])]))
    if cfg.get("analytics.figures"):
        from .plotting import render_all
        render_all(doc, records, read_edges(out / EDGES_CSV), out / "figures")
    return doc


_SCHEMA_CACHE = {}


def report_schema() -> dict:
    if "s" not in _SCHEMA_CACHE:
        path = Path(__file__).with_name("report_schema.json")
        _SCHEMA_CACHE["s"] = json.loads(path.read_text())
    return _SCHEMA_CACHE["s"]


def validate_report(doc: dict) -> None:
    import jsonschema
    jsonschema.validate(doc, report_schema())
