import random
import statistics

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rseri.ingest import RasterGrid
from rseri.raster import (LulcCategory, NdviClass, cell_index, classify_lulc,
                          classify_ndvi, lst_composite, percentile,
                          sample_raster)


def grid3x3():
    return RasterGrid(3, 3, 0.0, 0.0, 10.0, -9999.0,
                      np.arange(9, dtype=float).reshape(3, 3))


def test_cell_centre_and_outside():
    g = grid3x3()
    assert sample_raster(g, (15, 15)) == 4.0
    assert sample_raster(g, (-1, 15)) is None
    assert sample_raster(g, (15, 31)) is None


def test_shared_edge_goes_east_and_south():
    g = grid3x3()
    assert cell_index(g, 10.0, 15.0) == (1, 1)
    assert cell_index(g, 15.0, 20.0) == (1, 1)
    # outer east / south edges stay in the grid
    assert cell_index(g, 30.0, 0.0) == (2, 2)


def test_nodata_and_nan_are_missing():
    v = np.arange(9, dtype=float).reshape(3, 3)
    v[0, 0] = -9999.0
    v[0, 1] = np.nan
    g = RasterGrid(3, 3, 0.0, 0.0, 10.0, -9999.0, v)
    assert sample_raster(g, (5, 25)) is None
    assert sample_raster(g, (15, 25)) is None


def test_percentile_examples():
    assert percentile(range(1, 11), 0.9) == pytest.approx(9.1)
    assert percentile([4.2], 0.37) == 4.2
    assert percentile([None, 3.0, float("nan"), 1.0], 0.5) == 2.0
    with pytest.raises(ValueError):
        percentile([], 0.5)
    with pytest.raises(ValueError):
        percentile([1.0], 1.5)


def test_percentile_median_matches_sort_oracle():
    rng = random.Random(3)
    for n in (999, 1000):
        xs = [rng.gauss(30, 5) for _ in range(n)]
        assert percentile(xs, 0.5) == pytest.approx(statistics.median(xs),
                                                     rel=1e-15)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60),
       st.floats(0, 1))
def test_percentile_matches_numpy_linear(xs, p):
    assert percentile(xs, p) == pytest.approx(float(np.percentile(xs, 100 * p)),
                                              rel=1e-9, abs=1e-6)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=30),
       st.floats(0, 1), st.floats(0, 1))
def test_percentile_monotone_in_p(xs, p, q):
    lo, hi = sorted((p, q))
    assert percentile(xs, lo) <= percentile(xs, hi) + 1e-9


def test_ndvi_classes():
    assert classify_ndvi(0.1) is NdviClass.LOW
    assert classify_ndvi(0.2) is NdviClass.MODERATE
    assert classify_ndvi(0.5) is NdviClass.HIGH
    assert classify_ndvi(0.7) is NdviClass.HIGH
    assert classify_ndvi(-1.0) is NdviClass.LOW
    with pytest.raises(ValueError):
        classify_ndvi(1.2)


def test_lulc_categories(caplog):
    legend = {1: "urban", 2: "Urban", 3: "Vegetation", 7: "Tundra"}
    assert classify_lulc(1, legend) is LulcCategory.URBAN
    assert classify_lulc(2, legend) is LulcCategory.URBAN
    assert classify_lulc(3, legend) is LulcCategory.VEGETATION
    assert classify_lulc(7, legend) is LulcCategory.OTHER
    assert classify_lulc(99, legend) is LulcCategory.OTHER
    assert "99" in caplog.text


def test_lst_composite():
    assert lst_composite([21.0, None, 35.5, 30.0]) == (35.5, 30.0)
    assert lst_composite([None, None]) == (None, None)
