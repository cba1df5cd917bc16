"""Readers and writers for the three input families.

* GeoJSON FeatureCollections (flood zones, substations, roads, districts)
* ESRI ASCII grids (LST, NDVI, LULC class codes)
* the charger registry, as CSV or a GeoJSON point collection
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .geo import (
    GeoError,
    GeoPoint,
    Polygon,
    Polyline,
    ProjectedPoint,
    in_wales_envelope,
    project_wgs84_to_bng,
)

log = logging.getLogger(__name__)

Text = Union[str, bytes]

POINT, POLYLINE, POLYGON = "Point", "Polyline", "Polygon"
_KIND_OF = {
    "Point": POINT, "MultiPoint": POINT,
    "LineString": POLYLINE, "MultiLineString": POLYLINE,
    "Polygon": POLYGON, "MultiPolygon": POLYGON,
}
CRS_WGS84, CRS_PROJECTED = "wgs84", "projected"


class IngestError(ValueError):
    """Input could not be parsed; ``location`` points at the culprit."""

    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


def _decode(text: Text) -> str:
    if isinstance(text, bytes):
        try:
            return text.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise IngestError(f"not UTF-8 ({exc.reason})",
                              f"byte {exc.start}") from exc
    return text


# --------------------------------------------------------------------------
# Vector layers

@dataclass(frozen=True)
class Feature:
    geometry: Union[ProjectedPoint, Polyline, Polygon]
    properties: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class VectorLayer:
    name: str
    geometry_kind: Optional[str]
    features: Tuple[Feature, ...]

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)


def _scalar(v):
    if v is None or isinstance(v, (str, int, float, bool)):
        return v
    return json.dumps(v, sort_keys=True)


def _xy(coord, crs: str, where: str) -> ProjectedPoint:
    try:
        x, y = float(coord[0]), float(coord[1])
    except (TypeError, ValueError, IndexError) as exc:
        raise IngestError(f"bad coordinate {coord!r}", where) from exc
    if crs == CRS_WGS84:
        try:
            return project_wgs84_to_bng(GeoPoint(x, y))
        except GeoError as exc:
            raise IngestError(str(exc), where) from exc
    if not (math.isfinite(x) and math.isfinite(y)):
        raise IngestError(f"non-finite coordinate {coord!r}", where)
    return ProjectedPoint(x, y)


def _geometries(geom: dict, crs: str, where: str):
    gtype = geom.get("type")
    coords = geom.get("coordinates")
    if gtype not in _KIND_OF:
        raise IngestError(f"unsupported geometry type {gtype!r}", where)
    if coords is None:
        raise IngestError(f"{gtype} without coordinates", where)

    def ring(r):
        return tuple(_xy(c, crs, where) for c in r)

    def poly(rings):
        if not rings:
            raise IngestError("polygon without rings", where)
        try:
            return Polygon(ring(rings[0]), tuple(ring(h) for h in rings[1:]))
        except GeoError as exc:
            raise IngestError(f"invalid polygon: {exc}", where) from exc

    def line(pts):
        try:
            return Polyline(tuple(_xy(c, crs, where) for c in pts))
        except GeoError as exc:
            raise IngestError(f"invalid linestring: {exc}", where) from exc

    if gtype == "Point":
        return [_xy(coords, crs, where)]
    if gtype == "MultiPoint":
        return [_xy(c, crs, where) for c in coords]
    if gtype == "LineString":
        return [line(coords)]
    if gtype == "MultiLineString":
        return [line(part) for part in coords]
    if gtype == "Polygon":
        return [poly(coords)]
    return [poly(part) for part in coords]


def parse_geojson(text: Text, name: str = "", crs: str = CRS_PROJECTED
                  ) -> VectorLayer:
    """Parse a FeatureCollection into a homogeneous layer.

    Multi-part geometries are flattened into one feature per part, each
    carrying a copy of the parent's properties.
    """
    src = _decode(text)
    try:
        doc = json.loads(src)
    except json.JSONDecodeError as exc:
        raise IngestError(exc.msg, f"line {exc.lineno}, column {exc.colno}"
                          ) from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise IngestError("top-level object is not a FeatureCollection")
    raw = doc.get("features")
    if not isinstance(raw, list):
        raise IngestError("FeatureCollection.features is not a list")

    kind = None
    features: List[Feature] = []
    for i, feat in enumerate(raw):
        where = f"feature {i}"
        if not isinstance(feat, dict) or not isinstance(
                feat.get("geometry"), dict):
            raise IngestError("feature without geometry object", where)
        gtype = feat["geometry"].get("type")
        fkind = _KIND_OF.get(gtype)
        if fkind is None:
            raise IngestError(f"unsupported geometry type {gtype!r}", where)
        if kind is None:
            kind = fkind
        elif fkind != kind:
            raise IngestError(
                f"mixed geometry kinds: {kind} and {fkind}", where)
        props = {str(k): _scalar(v)
                 for k, v in (feat.get("properties") or {}).items()}
        for g in _geometries(feat["geometry"], crs, where):
            features.append(Feature(g, dict(props)))
    return VectorLayer(name or doc.get("name", ""), kind, tuple(features))


def _geometry_json(g) -> dict:
    if isinstance(g, Polygon):
        return {"type": "Polygon",
                "coordinates": [[list(p) for p in g.exterior]]
                + [[list(p) for p in h] for h in g.holes]}
    if isinstance(g, Polyline):
        return {"type": "LineString",
                "coordinates": [list(p) for p in g.vertices]}
    return {"type": "Point", "coordinates": [g[0], g[1]]}


def layer_to_geojson(layer: VectorLayer) -> dict:
    """Projected-coordinate FeatureCollection (legacy ``crs`` member set)."""
    return {
        "type": "FeatureCollection",
        "name": layer.name,
        "crs": {"type": "name",
                "properties": {"name": "urn:ogc:def:crs:EPSG::27700"}},
        "features": [
            {"type": "Feature", "properties": dict(f.properties),
             "geometry": _geometry_json(f.geometry)}
            for f in layer.features
        ],
    }


def write_geojson(layer: VectorLayer) -> str:
    return json.dumps(layer_to_geojson(layer), indent=None,
                      separators=(",", ":"))


# --------------------------------------------------------------------------
# Rasters

_GRID_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize",
              "nodata_value")
_HEADER_WORDS = set(_GRID_KEYS) | {"xllcenter", "yllcenter"}


@dataclass(frozen=True, eq=False)
class RasterGrid:
    ncols: int
    nrows: int
    xllcorner: float
    yllcorner: float
    cellsize: float
    nodata: float
    values: np.ndarray  # shape (nrows, ncols), row 0 is the northern edge

    def __post_init__(self):
        if self.ncols <= 0 or self.nrows <= 0:
            raise IngestError("ncols and nrows must be positive")
        if not self.cellsize > 0:
            raise IngestError(f"cellsize must be > 0, got {self.cellsize}")
        if self.values.shape != (self.nrows, self.ncols):
            raise IngestError(
                f"values shape {self.values.shape} != "
                f"({self.nrows}, {self.ncols})")

    @property
    def valid_mask(self) -> np.ndarray:
        return self.values != self.nodata

    @property
    def all_nodata(self) -> bool:
        return not bool(self.valid_mask.any())

    @property
    def extent(self) -> Tuple[float, float, float, float]:
        return (self.xllcorner, self.yllcorner,
                self.xllcorner + self.ncols * self.cellsize,
                self.yllcorner + self.nrows * self.cellsize)

    def valid_values(self) -> np.ndarray:
        return self.values[self.valid_mask]

    def __eq__(self, other):
        if not isinstance(other, RasterGrid):
            return NotImplemented
        return (self.ncols == other.ncols and self.nrows == other.nrows
                and self.xllcorner == other.xllcorner
                and self.yllcorner == other.yllcorner
                and self.cellsize == other.cellsize
                and self.nodata == other.nodata
                and np.array_equal(self.values, other.values))


def parse_ascii_grid(text: Text) -> RasterGrid:
    src = _decode(text)
    tokens = src.split()
    header: Dict[str, float] = {}
    pos = 0
    while pos + 1 < len(tokens) and tokens[pos].lower() in _HEADER_WORDS:
        key = tokens[pos].lower()
        try:
            header[key] = float(tokens[pos + 1])
        except ValueError as exc:
            raise IngestError(f"header {tokens[pos]} has non-numeric value "
                              f"{tokens[pos + 1]!r}") from exc
        pos += 2

    # centre-registered headers are shifted to corners
    for axis in ("x", "y"):
        if f"{axis}llcenter" in header and f"{axis}llcorner" not in header:
            header[f"{axis}llcorner"] = (header.pop(f"{axis}llcenter")
                                         - header.get("cellsize", 0.0) / 2)
    missing = [k for k in _GRID_KEYS if k not in header]
    if missing:
        raise IngestError(f"missing header key(s): {', '.join(missing)}")
    ncols, nrows = header["ncols"], header["nrows"]
    if ncols != int(ncols) or nrows != int(nrows):
        raise IngestError("ncols/nrows must be integers")
    ncols, nrows = int(ncols), int(nrows)

    body = tokens[pos:]
    if len(body) != ncols * nrows:
        raise IngestError(f"expected {ncols * nrows} values "
                          f"({nrows} rows x {ncols} cols), found {len(body)}")
    try:
        values = np.array([float(t) for t in body], dtype=np.float64)
    except ValueError:
        bad = next(i for i, t in enumerate(body) if not _is_number(t))
        raise IngestError(f"non-numeric token {body[bad]!r}",
                          f"row {bad // ncols + 1}, column {bad % ncols + 1}")
    return RasterGrid(ncols, nrows, header["xllcorner"], header["yllcorner"],
                      header["cellsize"], header["nodata_value"],
                      values.reshape(nrows, ncols))


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_ascii_grid(grid: RasterGrid) -> str:
    out = io.StringIO()
    out.write(f"ncols {grid.ncols}\nnrows {grid.nrows}\n")
    out.write(f"xllcorner {_num(grid.xllcorner)}\n")
    out.write(f"yllcorner {_num(grid.yllcorner)}\n")
    out.write(f"cellsize {_num(grid.cellsize)}\n")
    out.write(f"NODATA_value {_num(grid.nodata)}\n")
    for row in grid.values:
        out.write(" ".join(_num(v) for v in row))
        out.write("\n")
    return out.getvalue()


def parse_legend(text: Text) -> Dict[int, str]:
    """LULC legend: JSON object mapping class code to category name."""
    try:
        doc = json.loads(_decode(text))
    except json.JSONDecodeError as exc:
        raise IngestError(exc.msg, f"line {exc.lineno}, column {exc.colno}"
                          ) from exc
    if not isinstance(doc, dict):
        raise IngestError("legend must be a JSON object")
    legend = {}
    for k, v in doc.items():
        try:
            code = int(k)
        except ValueError as exc:
            raise IngestError(f"legend key {k!r} is not an integer") from exc
        legend[code] = str(v)
    return legend


# --------------------------------------------------------------------------
# Chargers

class Status(str, Enum):
    ACTIVE = "Active"
    INACTIVE = "Inactive"
    UNKNOWN = "Unknown"


_ACTIVE = {"operational", "active", "true", "1"}
_INACTIVE = {"inactive", "non-operational", "nonoperational", "false", "0",
             "closed", "removed", "decommissioned", "offline", "planned"}


def normalize_status(raw: Any) -> Status:
    s = str(raw).strip().lower()
    if s in _ACTIVE:
        return Status.ACTIVE
    if s in _INACTIVE:
        return Status.INACTIVE
    return Status.UNKNOWN


@dataclass
class ChargerStation:
    id: str
    location: Optional[GeoPoint]
    projected: ProjectedPoint
    status: Status = Status.ACTIVE
    properties: Dict[str, Any] = field(default_factory=dict)
    sampled: Dict[str, Any] = field(default_factory=dict)
    risk: Any = None
    rseri: Optional[float] = None
    rseri_class: Optional[str] = None
    lad_id: Optional[str] = None


@dataclass
class LoadedChargers:
    stations: List[ChargerStation]
    dropped: List[Tuple[str, str]]  # (id, raw status)
    outside_envelope: List[str] = field(default_factory=list)

    @property
    def n_dropped(self) -> int:
        return len(self.dropped)


REQUIRED_COLUMNS = ("id", "lon", "lat", "status")


def _station(cid, x, y, crs, where, props, status):
    try:
        x, y = float(x), float(y)
    except (TypeError, ValueError) as exc:
        raise IngestError(f"unparseable coordinate ({x!r}, {y!r})",
                          where) from exc
    if crs == CRS_WGS84:
        loc = GeoPoint(x, y)
        try:
            proj = project_wgs84_to_bng(loc)
        except GeoError as exc:
            raise IngestError(str(exc), where) from exc
    else:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise IngestError(f"non-finite coordinate ({x}, {y})", where)
        loc, proj = None, ProjectedPoint(x, y)
    return ChargerStation(cid, loc, proj, status, props)


def _rows_csv(src: str):
    reader = csv.DictReader(io.StringIO(src))
    cols = [c.strip().lower() for c in (reader.fieldnames or [])]
    missing = [c for c in REQUIRED_COLUMNS if c not in cols]
    if missing:
        raise IngestError(f"missing required column(s): {', '.join(missing)}",
                          "header")
    reader.fieldnames = cols
    for line_no, row in enumerate(reader, start=2):
        if None in row:
            raise IngestError("too many fields", f"line {line_no}")
        yield f"line {line_no}", row


def _rows_geojson(src: str):
    try:
        doc = json.loads(src)
    except json.JSONDecodeError as exc:
        raise IngestError(exc.msg, f"line {exc.lineno}, column {exc.colno}"
                          ) from exc
    for i, feat in enumerate(doc.get("features", [])):
        geom = feat.get("geometry") or {}
        if geom.get("type") != "Point":
            raise IngestError(
                f"charger geometry must be Point, got {geom.get('type')!r}",
                f"feature {i}")
        props = dict(feat.get("properties") or {})
        for key in ("id", "status"):
            if key not in props:
                raise IngestError(f"missing property {key!r}", f"feature {i}")
        lon, lat = geom["coordinates"][:2]
        yield f"feature {i}", {**props, "lon": lon, "lat": lat}


def load_chargers(table: Text, format: str = "csv", crs: str = CRS_WGS84
                  ) -> LoadedChargers:
    """Load the charger registry and keep only active stations.

    With ``crs="projected"`` the ``lon``/``lat`` columns carry easting and
    northing in metres and projection is skipped.
    """
    src = _decode(table)
    fmt = format.lower()
    if fmt == "csv":
        rows = _rows_csv(src)
    elif fmt in ("geojson", "geojsonpoints"):
        rows = _rows_geojson(src)
    else:
        raise IngestError(f"unknown charger format {format!r}")

    stations: List[ChargerStation] = []
    dropped: List[Tuple[str, str]] = []
    seen: Dict[str, str] = {}
    dupes: List[str] = []
    for where, row in rows:
        cid = str(row["id"]).strip()
        if not cid:
            raise IngestError("empty id", where)
        if cid in seen:
            dupes.append(cid)
            continue
        seen[cid] = where
        status = normalize_status(row["status"])
        props = {k: v for k, v in row.items() if k not in REQUIRED_COLUMNS}
        st = _station(cid, row["lon"], row["lat"], crs, where, props, status)
        if status is Status.ACTIVE:
            stations.append(st)
        else:
            if status is Status.UNKNOWN:
                log.warning("charger %s has unrecognised status %r; dropped",
                            cid, row["status"])
            dropped.append((cid, str(row["status"])))
    if dupes:
        raise IngestError("duplicate charger id(s): "
                          + ", ".join(sorted(set(dupes))))
    outside = [s.id for s in stations if not in_wales_envelope(s.projected)]
    if outside:
        log.warning("%d charger(s) fall outside the Wales envelope",
                    len(outside))
    return LoadedChargers(stations, dropped, outside)
