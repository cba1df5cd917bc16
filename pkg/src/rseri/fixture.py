"""Synthetic Wales-extent datasets for desk-scale runs and tests.

Chargers sit on a jittered 3 km lattice with one 1 km raster cell each, so
every station's hazards can be set independently: a flood square around the
station, a substation 150 m away (or none within 5 km), a short road stub
80 m away (or none within 2 km), and its own LST / NDVI / LULC cell values.

With ``match_paper_marginals`` the per-station risk vectors are drawn from
a fixed joint table whose marginals and pairwise intersections are the
published Welsh counts (n = 920).
"""
from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
import yaml

from .geo import (GeoPoint, ProjectedPoint, project_wgs84_to_bng,
                  unproject_bng_to_wgs84)
from .ingest import RasterGrid, write_ascii_grid

REFERENCE_N = 920

# (flood, lst, grid, road, vegetation) -> station count. Marginals:
# flood 141, lst 667, grid 17, road 72, vegetation 483, any 817; joint:
# F&L 110, F&V 85, L&V 376, G&R 8, F&L&V 66.
REFERENCE_JOINT: Dict[Tuple[int, int, int, int, int], int] = {
    (1, 1, 0, 0, 1): 66,
    (1, 1, 0, 0, 0): 44,
    (1, 0, 0, 0, 1): 19,
    (1, 0, 0, 0, 0): 12,
    (0, 1, 0, 0, 1): 310,
    (0, 1, 0, 0, 0): 247 - 50,
    (0, 1, 0, 1, 0): 50,
    (0, 0, 0, 0, 1): 88,
    (0, 0, 1, 1, 0): 8,
    (0, 0, 1, 0, 0): 9,
    (0, 0, 0, 1, 0): 14,
    (0, 0, 0, 0, 0): 103,
}

# random-mode exposure rates, matching the published marginals
RATES = (141 / 920, 667 / 920, 17 / 920, 72 / 920, 483 / 920)

LAD_NAMES = (
    "Isle of Anglesey", "Gwynedd", "Conwy", "Denbighshire", "Flintshire",
    "Wrexham", "Ceredigion", "Powys", "Pembrokeshire", "Carmarthenshire",
    "Swansea", "Neath Port Talbot", "Bridgend", "Vale of Glamorgan",
    "Cardiff", "Rhondda Cynon Taf", "Merthyr Tydfil", "Caerphilly",
    "Blaenau Gwent", "Torfaen", "Monmouthshire", "Newport",
)
LAD_ROWS = (4, 5, 4, 5, 4)

LEGEND = {1: "urban", 2: "vegetation", 3: "coastal", 4: "water",
          5: "bare ground"}

SPACING = 3000.0
CELL = 1000.0
X0, Y0 = 170000.0, 170000.0
NCOLS, NROWS = 180, 230
LATTICE_X0 = 181500.0
LATTICE_Y0 = 181500.0
LATTICE_NX, LATTICE_NY = 53, 70
JITTER = 300.0
NODATA = -9999.0


def reference_vectors() -> List[Tuple[int, ...]]:
    out = []
    for vec, count in REFERENCE_JOINT.items():
        out.extend([vec] * count)
    assert len(out) == REFERENCE_N
    return out


def _slots():
    """Lattice slots split into the main field and the isolated grid-risk block."""
    main, remote = [], []
    for i in range(LATTICE_NX):
        for j in range(LATTICE_NY):
            if i >= 47 and j >= 64:
                remote.append((i, j))
            elif not (i >= 44 and j >= 61):
                main.append((i, j))
    return main, remote


def _cell_of(x: float, y: float) -> Tuple[int, int]:
    col = int((x - X0) // CELL)
    row = int((Y0 + NROWS * CELL - y) // CELL)
    return row, col


def _square(cx, cy, half):
    return [[cx - half, cy - half], [cx + half, cy - half],
            [cx + half, cy + half], [cx - half, cy + half],
            [cx - half, cy - half]]


def _r3(v: float) -> float:
    return round(v, 3)


def _fc(name: str, features: list) -> dict:
    return {"type": "FeatureCollection", "name": name,
            "crs": {"type": "name",
                    "properties": {"name": "urn:ogc:def:crs:EPSG::27700"}},
            "features": features}


def _lads(rng: random.Random) -> list:
    feats = []
    x1, y1 = X0 + NCOLS * CELL, Y0 + NROWS * CELL
    row_h = (y1 - Y0) / len(LAD_ROWS)
    k = 0
    for ri, ncol in enumerate(LAD_ROWS):
        top = y1 - ri * row_h
        bottom = top - row_h
        cuts = sorted(rng.uniform(X0 + 15000, x1 - 15000)
                      for _ in range(ncol - 1))
        xs = [X0] + [round(c, -2) for c in cuts] + [x1]
        for a, b in zip(xs[:-1], xs[1:]):
            ring = [[a, bottom], [b, bottom], [b, top], [a, top], [a, bottom]]
            feats.append({"type": "Feature",
                          "properties": {"id": f"LAD{k + 1:02d}",
                                         "name": LAD_NAMES[k]},
                          "geometry": {"type": "Polygon",
                                       "coordinates": [ring]}})
            k += 1
    return feats


def generate_fixture(out_dir, seed: int = 0, n: int = 50,
                     match_paper_marginals: bool = False) -> Path:
    """Write a complete input bundle plus ``config.yaml``; returns the config path."""
    if match_paper_marginals and n != REFERENCE_N:
        raise ValueError(f"--match-paper-marginals needs n={REFERENCE_N}")
    if n < 2:
        raise ValueError("n must be >= 2")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    nprng = np.random.default_rng(seed)
    main, remote = _slots()

    if match_paper_marginals:
        vectors = reference_vectors()
        rng.shuffle(vectors)
    else:
        vectors = [tuple(int(rng.random() < p) for p in RATES)
                   for _ in range(n)]
        # the isolated block only has room for so many grid-risk stations
        cap = len(remote)
        for idx, v in enumerate(vectors):
            if v[2] and cap <= 0:
                vectors[idx] = (v[0], v[1], 0, v[3], v[4])
            elif v[2]:
                cap -= 1
    n_inactive = max(0, round(0.05 * n))
    n_unknown = 1 if n >= 20 else 0
    if len(main) < n + n_inactive + n_unknown:
        raise ValueError(f"n={n} exceeds fixture lattice capacity")

    rng.shuffle(main)
    rng.shuffle(remote)
    main_iter, remote_iter = iter(main), iter(remote)

    lst1 = nprng.uniform(18.0, 30.0, size=(NROWS, NCOLS)).round(2)
    lst2 = nprng.uniform(18.0, 30.0, size=(NROWS, NCOLS)).round(2)
    ndvi = nprng.uniform(0.1, 0.9, size=(NROWS, NCOLS)).round(3)
    lulc = nprng.integers(1, 6, size=(NROWS, NCOLS)).astype(np.float64)

    chargers = []
    flood_parts, substations, roads = [], [], []

    def place(slot):
        i, j = slot
        ex = LATTICE_X0 + i * SPACING + rng.uniform(-JITTER, JITTER)
        ny = LATTICE_Y0 + j * SPACING + rng.uniform(-JITTER, JITTER)
        g = unproject_bng_to_wgs84(ProjectedPoint(ex, ny))
        lon, lat = f"{g.lon:.8f}", f"{g.lat:.8f}"
        q = project_wgs84_to_bng(GeoPoint(float(lon), float(lat)))
        return lon, lat, q

    for idx, vec in enumerate(vectors):
        flood, lst, gridr, road, veg = vec
        lon, lat, q = place(next(remote_iter) if gridr else next(main_iter))
        cid = f"EV{idx + 1:04d}"
        chargers.append([cid, lon, lat, rng.choice(
            ["Operational", "active", "Active", "1"]),
            rng.choice(["Type 2", "CCS", "CHAdeMO"])])
        x, y = q
        row, col = _cell_of(x, y)

        if flood:
            half = rng.uniform(40.0, 90.0)
            cx = x + rng.uniform(-10, 10)
            cy = y + rng.uniform(-10, 10)
            rings = [[[_r3(a), _r3(b)] for a, b in _square(cx, cy, half)]]
            if rng.random() < 0.25:
                # a hole that keeps clear of the station
                hx, hy = cx + half * 0.65, cy + half * 0.65
                rings.append([[_r3(a), _r3(b)]
                              for a, b in _square(hx, hy, half * 0.15)][::-1])
            flood_parts.append(rings)
        if not gridr:
            substations.append([_r3(x + 120.0), _r3(y - 90.0)])
        if not road:
            roads.append([[_r3(x - 150.0), _r3(y + 80.0)],
                          [_r3(x + 150.0), _r3(y + 80.0)]])

        if match_paper_marginals:
            if lst:
                hot = rng.uniform(36.0, 42.0)
                if rng.random() < 0.5:
                    lst1[row, col], lst2[row, col] = hot, rng.uniform(20, 26)
                else:
                    lst1[row, col], lst2[row, col] = rng.uniform(20, 26), hot
            else:
                lst1[row, col] = rng.uniform(15.0, 24.0)
                lst2[row, col] = rng.uniform(15.0, 24.0)
        else:
            lst1[row, col] = rng.uniform(18.0, 38.0)
            lst2[row, col] = rng.uniform(18.0, 38.0)

        if veg:
            ndvi[row, col] = rng.uniform(-0.1, 0.19)
            lulc[row, col] = rng.choice((1, 2))
        elif rng.random() < 0.5:
            ndvi[row, col] = rng.uniform(-0.1, 0.19)
            lulc[row, col] = rng.choice((3, 4, 5))
        else:
            ndvi[row, col] = rng.uniform(0.2, 0.85)
            lulc[row, col] = rng.choice((1, 2, 3, 4, 5))
        if not match_paper_marginals and n >= 10 and rng.random() < 0.03:
            ndvi[row, col] = NODATA

    # non-active registry rows, placed like the rest but never scored
    for k in range(n_inactive + n_unknown):
        lon, lat, _ = place(next(main_iter))
        status = rng.choice(["Inactive", "Non-Operational", "closed"]) \
            if k < n_inactive else "Temporarily Unavailable"
        chargers.append([f"EVX{k + 1:03d}", lon, lat, status, "Type 2"])
    chargers.sort(key=lambda r: r[0])

    lst1, lst2 = lst1.round(2), lst2.round(2)
    ndvi = ndvi.round(3)

    flood_feats = []
    for start in range(0, len(flood_parts), 5):
        parts = flood_parts[start:start + 5]
        geom = ({"type": "Polygon", "coordinates": parts[0]} if len(parts) == 1
                else {"type": "MultiPolygon", "coordinates": parts})
        flood_feats.append({"type": "Feature",
                            "properties": {"zone": "FZ3",
                                           "group": start // 5},
                            "geometry": geom})
    sub_feats = [{"type": "Feature", "properties": {"ref": f"SS{i + 1:04d}"},
                  "geometry": {"type": "Point", "coordinates": p}}
                 for i, p in enumerate(substations)]
    road_feats = [{"type": "Feature",
                   "properties": {"highway": rng.choice(["primary",
                                                         "motorway", "trunk"])},
                   "geometry": {"type": "LineString", "coordinates": line}}
                  for line in roads]

    files = {
        "flood.geojson": _fc("flood", flood_feats),
        "substations.geojson": _fc("substations", sub_feats),
        "roads.geojson": _fc("roads", road_feats),
        "lads.geojson": _fc("lads", _lads(rng)),
    }
    for name, doc in files.items():
        (out / name).write_text(json.dumps(doc, sort_keys=True) + "\n")
    (out / "lulc_legend.json").write_text(
        json.dumps({str(k): v for k, v in LEGEND.items()}, indent=2) + "\n")
    for name, arr in (("lst_1.asc", lst1), ("lst_2.asc", lst2),
                      ("ndvi.asc", ndvi), ("lulc.asc", lulc)):
        grid = RasterGrid(NCOLS, NROWS, X0, Y0, CELL, NODATA, arr)
        (out / name).write_text(write_ascii_grid(grid))
    lines = ["id,lon,lat,status,connector"]
    lines += [",".join(r) for r in chargers]
    (out / "chargers.csv").write_text("\n".join(lines) + "\n")

    config = {
        "inputs": {
            "chargers": "chargers.csv",
            "flood": "flood.geojson",
            "substations": "substations.geojson",
            "roads": "roads.geojson",
            "lads": "lads.geojson",
            "lst": ["lst_1.asc", "lst_2.asc"],
            "ndvi": "ndvi.asc",
            "lulc": "lulc.asc",
            "legend": "lulc_legend.json",
        },
        "crs": "wgs84",
        "layer_crs": "projected",
        "thresholds": {
            "lst_population": "raster" if match_paper_marginals else "chargers",
        },
        "output_dir": "out",
    }
    cfg_path = out / "config.yaml"
    cfg_path.write_text(yaml.safe_dump(config, sort_keys=True))
    return cfg_path
