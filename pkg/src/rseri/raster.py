"""Point sampling of rasters and the NDVI / LULC / LST classifiers."""
from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Tuple

from .ingest import RasterGrid

log = logging.getLogger(__name__)

NDVI_LOW = 0.2
NDVI_HIGH = 0.5


class NdviClass(str, Enum):
    LOW = "Low"
    MODERATE = "Moderate"
    HIGH = "High"


class LulcCategory(str, Enum):
    URBAN = "Urban"
    VEGETATION = "Vegetation"
    COASTAL = "Coastal"
    WATER = "Water"
    OTHER = "Other"


def cell_index(grid: RasterGrid, x: float, y: float) -> Optional[Tuple[int, int]]:
    """(row, col) of the cell holding (x, y), or None outside the grid.

    Cells are half-open towards the east and south, so a point on a shared
    edge lands in the eastern / southern neighbour. The outer east and south
    edges still belong to the last column / row.
    """
    if not (math.isfinite(x) and math.isfinite(y)):
        return None
    x0, y0, x1, y1 = grid.extent
    if not (x0 <= x <= x1 and y0 <= y <= y1):
        return None
    col = math.floor((x - x0) / grid.cellsize)
    row = math.floor((y1 - y) / grid.cellsize)
    col = min(max(col, 0), grid.ncols - 1)
    row = min(max(row, 0), grid.nrows - 1)
    return row, col


def sample_raster(grid: RasterGrid, q: Sequence[float]) -> Optional[float]:
    """Nearest-cell value at ``q``; None off-grid or on a nodata cell."""
    idx = cell_index(grid, q[0], q[1])
    if idx is None:
        return None
    v = float(grid.values[idx])
    if v == grid.nodata or math.isnan(v):
        return None
    return v


def percentile(values: Iterable[Optional[float]], p: float) -> float:
    """Linear interpolation between order statistics at rank p*(n-1)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    xs = sorted(v for v in values
                if v is not None and not (isinstance(v, float) and math.isnan(v)))
    if not xs:
        raise ValueError("percentile of an empty sample")
    rank = p * (len(xs) - 1)
    lo = math.floor(rank)
    hi = min(lo + 1, len(xs) - 1)
    frac = rank - lo
    if frac == 0.0:
        return float(xs[lo])
    return float(xs[lo] + (xs[hi] - xs[lo]) * frac)


def classify_ndvi(v: float, low: float = NDVI_LOW, high: float = NDVI_HIGH
                  ) -> NdviClass:
    if not -1.0 <= v <= 1.0:
        raise ValueError(f"NDVI {v} outside [-1, 1]")
    if v < low:
        return NdviClass.LOW
    if v < high:
        return NdviClass.MODERATE
    return NdviClass.HIGH


_CATEGORY_NAMES = {c.value.lower(): c for c in LulcCategory}


def classify_lulc(code: int, legend: Mapping[int, str]) -> LulcCategory:
    name = legend.get(int(code))
    if name is None:
        log.warning("LULC code %s not in legend; treated as Other", code)
        return LulcCategory.OTHER
    return _CATEGORY_NAMES.get(name.strip().lower(), LulcCategory.OTHER)


def lst_composite(samples: Sequence[Optional[float]]
                  ) -> Tuple[Optional[float], Optional[float]]:
    """(max, median) across a time series of LST samples at one site."""
    xs = [v for v in samples if v is not None]
    if not xs:
        return None, None
    return max(xs), percentile(xs, 0.5)
