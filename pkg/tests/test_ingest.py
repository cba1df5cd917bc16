import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rseri.geo import Polygon, Polyline, ProjectedPoint
from rseri.ingest import (POINT, POLYGON, POLYLINE, IngestError, Status,
                          load_chargers, normalize_status, parse_ascii_grid,
                          parse_geojson, parse_legend, write_ascii_grid,
                          write_geojson)
from rseri.raster import sample_raster

SQ = [[0, 0], [10, 0], [10, 10], [0, 10], [0, 0]]


def fc(*features):
    return json.dumps({"type": "FeatureCollection", "features": [
        {"type": "Feature", "properties": p, "geometry": g}
        for p, g in features]})


def test_single_polygon():
    layer = parse_geojson(fc(({"name": "a"}, {"type": "Polygon",
                                               "coordinates": [SQ]})))
    assert layer.geometry_kind == POLYGON
    assert len(layer) == 1
    assert isinstance(layer.features[0].geometry, Polygon)


def test_multipolygon_is_flattened():
    parts = [[[[x, 0], [x + 1, 0], [x + 1, 1], [x, 1], [x, 0]]] for x in (0, 5, 9)]
    layer = parse_geojson(fc(({"zone": 3}, {"type": "MultiPolygon",
                                             "coordinates": parts})))
    assert len(layer) == 3
    assert all(f.properties == {"zone": 3} for f in layer)


def test_multilinestring_and_points():
    lines = parse_geojson(fc(({}, {"type": "MultiLineString",
                                   "coordinates": [[[0, 0], [1, 1]],
                                                   [[2, 2], [3, 3]]]})))
    assert lines.geometry_kind == POLYLINE and len(lines) == 2
    pts = parse_geojson(fc(({}, {"type": "MultiPoint",
                                 "coordinates": [[1, 2], [3, 4]]})))
    assert pts.geometry_kind == POINT
    assert pts.features[1].geometry == ProjectedPoint(3, 4)


def test_truncated_file_raises_with_location():
    text = fc(({}, {"type": "Polygon", "coordinates": [SQ]}))
    with pytest.raises(IngestError) as exc:
        parse_geojson(text[: len(text) // 2])
    assert "line" in str(exc.value)


def test_mixed_kinds_rejected():
    with pytest.raises(IngestError, match="mixed"):
        parse_geojson(fc(({}, {"type": "Point", "coordinates": [0, 0]}),
                         ({}, {"type": "LineString",
                               "coordinates": [[0, 0], [1, 1]]})))


def test_invalid_ring_rejected():
    with pytest.raises(IngestError):
        parse_geojson(fc(({}, {"type": "Polygon",
                               "coordinates": [[[0, 0], [1, 0], [0, 0]]]})))


def test_wgs84_layer_is_projected():
    layer = parse_geojson(fc(({}, {"type": "Point",
                                   "coordinates": [-3.1791, 51.4816]})),
                          crs="wgs84")
    e, n = layer.features[0].geometry
    assert 300000 < e < 340000 and 160000 < n < 190000


def test_geojson_round_trip():
    text = fc(({"a": 1, "b": "x"}, {"type": "Polygon", "coordinates": [
        SQ, [[2, 2], [3, 2], [3, 3], [2, 3], [2, 2]]]}),
        ({"a": None}, {"type": "Polygon",
                       "coordinates": [[[0.1, 0.2], [5.3, 0.7], [2.2, 9.9],
                                        [0.1, 0.2]]]}))
    first = parse_geojson(text, name="flood")
    second = parse_geojson(write_geojson(first))
    assert second == first


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=50)
@given(st.lists(st.lists(st.tuples(finite, finite), min_size=2, max_size=6,
                         unique=True), min_size=1, max_size=5))
def test_polyline_round_trip_is_bit_exact(lines):
    layer = parse_geojson(fc(*[({"i": i}, {"type": "LineString",
                                            "coordinates": [list(p) for p in ln]})
                               for i, ln in enumerate(lines)]))
    again = parse_geojson(write_geojson(layer))
    assert again == layer
    for f, ln in zip(again, lines):
        assert isinstance(f.geometry, Polyline)
        assert f.geometry.vertices == tuple(ln)


# ascii grids --------------------------------------------------------------

GRID = """ncols 2
nrows 2
xllcorner 0
yllcorner 0
cellsize 10
NODATA_value -9999
1 2
3 4
"""


def test_first_row_is_north():
    g = parse_ascii_grid(GRID)
    assert sample_raster(g, (5, 15)) == 1.0
    assert sample_raster(g, (15, 15)) == 2.0
    assert sample_raster(g, (5, 5)) == 3.0
    assert g.extent == (0, 0, 20, 20)


def test_value_count_mismatch():
    with pytest.raises(IngestError, match="expected 4"):
        parse_ascii_grid(GRID.replace("3 4", "3 4 5"))


def test_missing_header_key():
    with pytest.raises(IngestError, match="cellsize"):
        parse_ascii_grid(GRID.replace("cellsize 10\n", ""))


def test_bad_token_location():
    with pytest.raises(IngestError) as exc:
        parse_ascii_grid(GRID.replace("3 4", "3 x"))
    assert exc.value.location == "row 2, column 2"


def test_all_nodata_grid_is_valid():
    g = parse_ascii_grid(GRID.replace("1 2\n3 4", "-9999 -9999\n-9999 -9999"))
    assert g.all_nodata
    assert sample_raster(g, (5, 5)) is None


def test_center_registration():
    g = parse_ascii_grid(GRID.replace("xllcorner 0", "XLLCENTER 5")
                         .replace("yllcorner 0", "yllcenter 5"))
    assert (g.xllcorner, g.yllcorner) == (0, 0)


def test_grid_round_trip():
    g = parse_ascii_grid(GRID.replace("1 2", "1.25 -9999"))
    assert parse_ascii_grid(write_ascii_grid(g)) == g
    assert np.isclose(g.valid_values().sum(), 8.25)


def test_legend():
    assert parse_legend('{"1": "Urban", "2": "Urban"}') == {1: "Urban", 2: "Urban"}
    with pytest.raises(IngestError):
        parse_legend('{"x": "Urban"}')
    with pytest.raises(IngestError):
        parse_legend("[1, 2]")


# chargers -----------------------------------------------------------------

def test_active_filter_and_drop_count():
    csv = ("id,lon,lat,status\n"
           "A,-3.18,51.48,Operational\n"
           "B,-3.20,51.50,active\n"
           "C,-3.10,51.40,Inactive\n")
    out = load_chargers(csv)
    assert [s.id for s in out.stations] == ["A", "B"]
    assert out.n_dropped == 1


def test_duplicate_id_listed():
    csv = "id,lon,lat,status\nCH1,-3,52,active\nCH1,-3.1,52,active\n"
    with pytest.raises(IngestError, match="CH1"):
        load_chargers(csv)


def test_missing_column():
    with pytest.raises(IngestError, match="status"):
        load_chargers("id,lon,lat\nA,-3,52\n")


def test_unknown_status_dropped_with_warning(caplog):
    out = load_chargers("id,lon,lat,status\nA,-3,52,maybe\nB,-3,52.1,1\n")
    assert [s.id for s in out.stations] == ["B"]
    assert out.dropped == [("A", "maybe")]
    assert "unrecognised status" in caplog.text


def test_status_mapping():
    for raw in ("Operational", " ACTIVE", "true", "1"):
        assert normalize_status(raw) is Status.ACTIVE
    assert normalize_status("Closed") is Status.INACTIVE
    assert normalize_status("???") is Status.UNKNOWN


def test_geojson_chargers_and_projected_mode():
    doc = fc(({"id": "X", "status": "Operational"},
              {"type": "Point", "coordinates": [-3.18, 51.48]}))
    out = load_chargers(doc, format="geojson")
    assert out.stations[0].location.lon == -3.18
    proj = load_chargers("id,lon,lat,status\nP,250000,300000,active\n",
                         crs="projected")
    assert proj.stations[0].projected == ProjectedPoint(250000, 300000)
    assert proj.stations[0].location is None


def test_outside_envelope_flagged():
    out = load_chargers("id,lon,lat,status\nLDN,-0.13,51.5,active\n")
    assert out.outside_envelope == ["LDN"]


def test_bad_latitude_reports_line():
    with pytest.raises(IngestError, match="line 2"):
        load_chargers("id,lon,lat,status\nA,-3,95,active\n")
