"""Writes the hand-placed 10-charger fixture next to this script.

Layout and expected indicators are explained in README.md; rerun this
script only if the layout there changes.
"""
import json
from pathlib import Path

HERE = Path(__file__).parent
X0, Y0, CELL, NCOLS, NROWS = 200000, 200000, 1000, 60, 40

CHARGERS = [  # id, easting, northing, status
    ("C01", 209500, 210500, "Operational"),
    ("C02", 212500, 214500, "Operational"),
    ("C03", 203500, 209500, "Operational"),
    ("C04", 212500, 208500, "Operational"),
    ("C05", 207500, 211500, "Operational"),
    ("C06", 241500, 221500, "Operational"),
    ("C07", 248500, 228500, "Operational"),
    ("C08", 242500, 228500, "Operational"),
    ("C09", 245500, 225500, "Operational"),
    ("C10", 240000, 226500, "Operational"),
    ("C11", 220500, 220500, "Closed"),
]


def cell(x, y):
    # east/south-wins on shared edges
    return (int((Y0 + NROWS * CELL - y) // CELL), int((x - X0) // CELL))


def grid(background, overrides, nodata=-9999):
    rows = [[background] * NCOLS for _ in range(NROWS)]
    for cid, v in overrides.items():
        _, x, y, _ = next(c for c in CHARGERS if c[0] == cid)
        r, c = cell(x, y)
        rows[r][c] = v
    head = (f"ncols {NCOLS}\nnrows {NROWS}\nxllcorner {X0}\nyllcorner {Y0}\n"
            f"cellsize {CELL}\nNODATA_value {nodata}\n")
    return head + "".join(" ".join(str(v) for v in row) + "\n" for row in rows)


def fc(features):
    return json.dumps({"type": "FeatureCollection", "features": [
        {"type": "Feature", "properties": p, "geometry": g}
        for p, g in features]}, indent=1) + "\n"


def rect(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]


def main():
    (HERE / "chargers.csv").write_text(
        "id,lon,lat,status\n"
        + "".join(f"{c},{x},{y},{s}\n" for c, x, y, s in CHARGERS))
    (HERE / "flood.geojson").write_text(fc([
        ({"zone": "FZ3"}, {"type": "Polygon", "coordinates": [
            rect(240000, 220000, 250000, 230000),
            rect(244000, 224000, 246000, 226000)]})]))
    (HERE / "substations.geojson").write_text(fc([
        ({"name": n}, {"type": "Point", "coordinates": xy})
        for n, xy in (("S_W", [210000, 212000]), ("S_E1", [238000, 219000]),
                      ("S_E2", [242500, 232000]), ("S_E3", [237000, 226500]))]))
    (HERE / "roads.geojson").write_text(fc([
        ({"ref": "R_W"}, {"type": "LineString",
                          "coordinates": [[200000, 210000], [228000, 210000]]}),
        ({"ref": "R_E"}, {"type": "LineString",
                          "coordinates": [[235000, 220500], [250000, 220500]]}),
        ({"ref": "R_E2"}, {"type": "LineString",
                           "coordinates": [[238500, 224000], [238500, 229000]]}),
    ]))
    (HERE / "lads.geojson").write_text(fc([
        ({"id": "W06000008", "name": "Ceredigion"},
         {"type": "Polygon", "coordinates": [rect(200000, 200000, 230000, 240000)]}),
        ({"id": "W06000012", "name": "Neath Port Talbot"},
         {"type": "Polygon", "coordinates": [rect(230000, 200000, 260000, 240000)]}),
    ]))
    (HERE / "lst_t1.asc").write_text(grid(20, {"C04": 40, "C06": 40, "C07": 40}))
    (HERE / "lst_t2.asc").write_text(grid(22, {"C09": 40, "C10": 40}))
    (HERE / "ndvi.asc").write_text(grid(0.6, {
        "C01": 0.2, "C03": 0.1, "C04": 0.1, "C05": -9999, "C06": 0.15,
        "C08": 0.19, "C10": 0.05}))
    (HERE / "lulc.asc").write_text(grid(2, {
        "C02": 4, "C03": 3, "C04": 1, "C06": 1, "C07": 1, "C09": 5}))
    (HERE / "legend.json").write_text(json.dumps(
        {"1": "Urban", "2": "Vegetation", "3": "Water", "4": "Coastal",
         "5": "Other"}, indent=1) + "\n")
    (HERE / "config.yaml").write_text(
        "inputs:\n"
        "  chargers: chargers.csv\n"
        "  flood: flood.geojson\n"
        "  substations: substations.geojson\n"
        "  roads: roads.geojson\n"
        "  lads: lads.geojson\n"
        "  lst: [lst_t1.asc, lst_t2.asc]\n"
        "  ndvi: ndvi.asc\n"
        "  lulc: lulc.asc\n"
        "  legend: legend.json\n"
        "crs: projected\n"
        "thresholds:\n"
        "  lst_population: raster\n"
        "output_dir: out\n")


if __name__ == "__main__":
    main()
