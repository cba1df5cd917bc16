"""Geometry primitives in British National Grid metres.

Everything downstream of ingest works on projected coordinates. Geographic
input is pushed through ``project_wgs84_to_bng`` once, at load time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Tuple

import numpy as np


class GeoError(ValueError):
    """Raised for out-of-domain coordinates or malformed geometry."""


class GeoPoint(NamedTuple):
    lon: float
    lat: float


class ProjectedPoint(NamedTuple):
    easting: float
    northing: float


Ring = Tuple[Tuple[float, float], ...]

# Airy 1830 (OSGB36) and GRS80 (ETRS89 / WGS84 for our purposes)
AIRY_A, AIRY_B = 6377563.396, 6356256.909
GRS80_A, GRS80_B = 6378137.000, 6356752.314140

# National Grid true origin
F0 = 0.9996012717
LAT0 = math.radians(49.0)
LON0 = math.radians(-2.0)
E0, N0 = 400000.0, -100000.0

# WGS84 -> OSGB36, position-vector convention
HELMERT = {
    "tx": -446.448, "ty": 125.157, "tz": -542.060,
    "rx": -0.1502, "ry": -0.2470, "rz": -0.8421,  # arc-seconds
    "s": 20.4894,  # ppm
}

WALES_EASTING = (130000.0, 420000.0)
WALES_NORTHING = (150000.0, 420000.0)


def _check_geo(lon: float, lat: float) -> None:
    if not (math.isfinite(lon) and math.isfinite(lat)):
        raise GeoError(f"non-finite coordinate ({lon}, {lat})")
    if not -180.0 <= lon <= 180.0:
        raise GeoError(f"longitude {lon} outside [-180, 180]")
    if not -90.0 <= lat <= 90.0:
        raise GeoError(f"latitude {lat} outside [-90, 90]")


def _geodetic_to_cartesian(lat, lon, a, b, h=0.0):
    e2 = 1 - (b * b) / (a * a)
    sin_lat = math.sin(lat)
    nu = a / math.sqrt(1 - e2 * sin_lat * sin_lat)
    x = (nu + h) * math.cos(lat) * math.cos(lon)
    y = (nu + h) * math.cos(lat) * math.sin(lon)
    z = ((1 - e2) * nu + h) * sin_lat
    return x, y, z


def _cartesian_to_geodetic(x, y, z, a, b):
    e2 = 1 - (b * b) / (a * a)
    p = math.hypot(x, y)
    lon = math.atan2(y, x)
    lat = math.atan2(z, p * (1 - e2))
    for _ in range(10):
        nu = a / math.sqrt(1 - e2 * math.sin(lat) ** 2)
        new = math.atan2(z + e2 * nu * math.sin(lat), p)
        if abs(new - lat) < 1e-14:
            lat = new
            break
        lat = new
    return lat, lon


def _helmert_matrix():
    sec = math.pi / (180.0 * 3600.0)
    rx, ry, rz = HELMERT["rx"] * sec, HELMERT["ry"] * sec, HELMERT["rz"] * sec
    s = 1.0 + HELMERT["s"] * 1e-6
    m = np.array([[s, -rz, ry], [rz, s, -rx], [-ry, rx, s]])
    t = np.array([HELMERT["tx"], HELMERT["ty"], HELMERT["tz"]])
    return m, t


_HM, _HT = _helmert_matrix()


def wgs84_to_osgb36(p: GeoPoint) -> GeoPoint:
    """Datum shift only: WGS84 lon/lat to OSGB36 lon/lat (degrees)."""
    _check_geo(p.lon, p.lat)
    xyz = _geodetic_to_cartesian(math.radians(p.lat), math.radians(p.lon),
                                 GRS80_A, GRS80_B)
    x, y, z = _HM @ np.asarray(xyz) + _HT
    lat, lon = _cartesian_to_geodetic(float(x), float(y), float(z),
                                      AIRY_A, AIRY_B)
    return GeoPoint(math.degrees(lon), math.degrees(lat))


def osgb36_to_wgs84(p: GeoPoint) -> GeoPoint:
    xyz = _geodetic_to_cartesian(math.radians(p.lat), math.radians(p.lon),
                                 AIRY_A, AIRY_B)
    x, y, z = np.linalg.solve(_HM, np.asarray(xyz) - _HT)
    lat, lon = _cartesian_to_geodetic(float(x), float(y), float(z),
                                      GRS80_A, GRS80_B)
    return GeoPoint(math.degrees(lon), math.degrees(lat))


def _meridional_arc(lat):
    n = (AIRY_A - AIRY_B) / (AIRY_A + AIRY_B)
    n2, n3 = n * n, n * n * n
    dl, sl = lat - LAT0, lat + LAT0
    return AIRY_B * F0 * (
        (1 + n + 1.25 * n2 + 1.25 * n3) * dl
        - (3 * n + 3 * n2 + 2.625 * n3) * math.sin(dl) * math.cos(sl)
        + (1.875 * n2 + 1.875 * n3) * math.sin(2 * dl) * math.cos(2 * sl)
        - (35.0 / 24.0) * n3 * math.sin(3 * dl) * math.cos(3 * sl)
    )


def osgb36_to_bng(p: GeoPoint) -> ProjectedPoint:
    """Transverse Mercator on Airy 1830: OSGB36 lon/lat to National Grid."""
    _check_geo(p.lon, p.lat)
    lat, lon = math.radians(p.lat), math.radians(p.lon)
    a, b = AIRY_A, AIRY_B
    e2 = 1 - (b * b) / (a * a)
    sin_lat, cos_lat = math.sin(lat), math.cos(lat)
    tan_lat = math.tan(lat)
    nu = a * F0 / math.sqrt(1 - e2 * sin_lat ** 2)
    rho = a * F0 * (1 - e2) / (1 - e2 * sin_lat ** 2) ** 1.5
    eta2 = nu / rho - 1
    m = _meridional_arc(lat)

    t2 = tan_lat ** 2
    i = m + N0
    ii = nu / 2 * sin_lat * cos_lat
    iii = nu / 24 * sin_lat * cos_lat ** 3 * (5 - t2 + 9 * eta2)
    iiia = nu / 720 * sin_lat * cos_lat ** 5 * (61 - 58 * t2 + t2 * t2)
    iv = nu * cos_lat
    v = nu / 6 * cos_lat ** 3 * (nu / rho - t2)
    vi = nu / 120 * cos_lat ** 5 * (5 - 18 * t2 + t2 * t2 + 14 * eta2
                                    - 58 * t2 * eta2)
    dl = lon - LON0
    northing = i + ii * dl ** 2 + iii * dl ** 4 + iiia * dl ** 6
    easting = E0 + iv * dl + v * dl ** 3 + vi * dl ** 5
    return ProjectedPoint(easting, northing)


def bng_to_osgb36(q: ProjectedPoint) -> GeoPoint:
    a, b = AIRY_A, AIRY_B
    e2 = 1 - (b * b) / (a * a)
    lat = LAT0
    m = 0.0
    while True:
        lat = (q.northing - N0 - m) / (a * F0) + lat
        m = _meridional_arc(lat)
        if abs(q.northing - N0 - m) < 1e-5:
            break
    sin_lat, cos_lat = math.sin(lat), math.cos(lat)
    tan_lat = math.tan(lat)
    nu = a * F0 / math.sqrt(1 - e2 * sin_lat ** 2)
    rho = a * F0 * (1 - e2) / (1 - e2 * sin_lat ** 2) ** 1.5
    eta2 = nu / rho - 1
    t2 = tan_lat ** 2
    sec = 1 / cos_lat
    vii = tan_lat / (2 * rho * nu)
    viii = tan_lat / (24 * rho * nu ** 3) * (5 + 3 * t2 + eta2 - 9 * t2 * eta2)
    ix = tan_lat / (720 * rho * nu ** 5) * (61 + 90 * t2 + 45 * t2 * t2)
    x = sec / nu
    xi = sec / (6 * nu ** 3) * (nu / rho + 2 * t2)
    xii = sec / (120 * nu ** 5) * (5 + 28 * t2 + 24 * t2 * t2)
    xiia = sec / (5040 * nu ** 7) * (61 + 662 * t2 + 1320 * t2 ** 2
                                      + 720 * t2 ** 3)
    de = q.easting - E0
    lat_out = lat - vii * de ** 2 + viii * de ** 4 - ix * de ** 6
    lon_out = LON0 + x * de - xi * de ** 3 + xii * de ** 5 - xiia * de ** 7
    return GeoPoint(math.degrees(lon_out), math.degrees(lat_out))


def project_wgs84_to_bng(p: GeoPoint) -> ProjectedPoint:
    """WGS84 lon/lat to EPSG:27700 easting/northing.

    Helmert datum shift to OSGB36 followed by the National Grid transverse
    Mercator. Without the OSTN15 grid shift this is good to a few metres
    against survey-grade conversions.
    """
    return osgb36_to_bng(wgs84_to_osgb36(p))


def unproject_bng_to_wgs84(q: ProjectedPoint) -> GeoPoint:
    return osgb36_to_wgs84(bng_to_osgb36(q))


def in_wales_envelope(q: ProjectedPoint) -> bool:
    return (WALES_EASTING[0] <= q.easting <= WALES_EASTING[1]
            and WALES_NORTHING[0] <= q.northing <= WALES_NORTHING[1])


def euclidean_distance(a: Sequence[float], b: Sequence[float]) -> float:
    dx = a[0] - b[0]
    dy = a[1] - b[1]
    return math.sqrt(dx * dx + dy * dy)


def point_segment_distance(q, a, b) -> float:
    ax, ay = a[0], a[1]
    dx, dy = b[0] - ax, b[1] - ay
    px, py = q[0] - ax, q[1] - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.sqrt(px * px + py * py)
    t = (px * dx + py * dy) / seg2
    if t <= 0.0:
        return math.sqrt(px * px + py * py)
    if t >= 1.0:
        ex, ey = q[0] - b[0], q[1] - b[1]
        return math.sqrt(ex * ex + ey * ey)
    cx, cy = px - t * dx, py - t * dy
    return math.sqrt(cx * cx + cy * cy)


@dataclass(frozen=True)
class Polyline:
    vertices: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        validate_polyline(verts)

    def segments(self):
        v = self.vertices
        return zip(v[:-1], v[1:])


@dataclass(frozen=True)
class Polygon:
    exterior: Ring
    holes: Tuple[Ring, ...] = ()

    def __post_init__(self):
        ext = _as_ring(self.exterior)
        holes = tuple(_as_ring(h) for h in self.holes)
        object.__setattr__(self, "exterior", ext)
        object.__setattr__(self, "holes", holes)
        validate_ring(ext, check_simple=True)
        for h in holes:
            validate_ring(h)

    @property
    def bbox(self):
        xs = [p[0] for p in self.exterior]
        ys = [p[1] for p in self.exterior]
        return min(xs), min(ys), max(xs), max(ys)


def _as_ring(ring) -> Ring:
    return tuple((float(p[0]), float(p[1])) for p in ring)


def validate_polyline(vertices) -> None:
    if len(vertices) < 2:
        raise GeoError("polyline needs at least 2 vertices")
    for a, b in zip(vertices[:-1], vertices[1:]):
        if a == b:
            raise GeoError(f"polyline repeats consecutive vertex {a}")


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _on_segment(q, a, b) -> bool:
    if _cross(a, b, q) != 0.0:
        return False
    return (min(a[0], b[0]) <= q[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= q[1] <= max(a[1], b[1]))


def _segments_cross(p1, p2, p3, p4) -> bool:
    d1 = _cross(p3, p4, p1)
    d2 = _cross(p3, p4, p2)
    d3 = _cross(p1, p2, p3)
    d4 = _cross(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0) and d1 != 0 and d2 != 0
            and (d3 > 0) != (d4 > 0) and d3 != 0 and d4 != 0):
        return True
    return (_on_segment(p1, p3, p4) or _on_segment(p2, p3, p4)
            or _on_segment(p3, p1, p2) or _on_segment(p4, p1, p2))


# O(n^2) check; larger rings are accepted unchecked
SIMPLE_CHECK_MAX_VERTICES = 2000


def validate_ring(ring: Ring, check_simple: bool = False) -> None:
    if len(ring) < 4:
        raise GeoError(f"ring has {len(ring)} vertices, need at least 4")
    if ring[0] != ring[-1]:
        raise GeoError("ring is not closed (first vertex != last)")
    for p in ring:
        if not (math.isfinite(p[0]) and math.isfinite(p[1])):
            raise GeoError(f"non-finite vertex {p}")
    n = len(ring) - 1
    if not check_simple or n > SIMPLE_CHECK_MAX_VERTICES:
        return
    for i in range(n):
        a, b = ring[i], ring[i + 1]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue  # shares the closing vertex
            if _segments_cross(a, b, ring[j], ring[j + 1]):
                raise GeoError(f"ring self-intersects at edges {i} and {j}")


def _ring_contains(q, ring: Ring) -> int:
    """1 inside, 0 outside, -1 on the boundary (even-odd crossing rule)."""
    y = q[1]
    inside = False
    for i in range(len(ring) - 1):
        a, b = ring[i], ring[i + 1]
        if _on_segment(q, a, b):
            return -1
        if a[1] <= y < b[1]:
            if _cross(a, b, q) > 0:
                inside = not inside
        elif b[1] <= y < a[1]:
            if _cross(a, b, q) < 0:
                inside = not inside
    return 1 if inside else 0


def point_in_polygon(q: Sequence[float], poly: Polygon) -> bool:
    """Even-odd ray casting; points on any ring edge count as inside."""
    minx, miny, maxx, maxy = poly.bbox
    if not (minx <= q[0] <= maxx and miny <= q[1] <= maxy):
        return False
    state = _ring_contains(q, poly.exterior)
    if state == 0:
        return False
    if state == -1:
        return True
    for hole in poly.holes:
        h = _ring_contains(q, hole)
        if h == -1:
            return True
        if h == 1:
            return False
    return True


def point_to_polyline_distance(q: Sequence[float], line: Polyline) -> float:
    return min(point_segment_distance(q, a, b) for a, b in line.segments())


def ring_distance(q: Sequence[float], ring: Ring) -> float:
    return min(point_segment_distance(q, ring[i], ring[i + 1])
               for i in range(len(ring) - 1))
