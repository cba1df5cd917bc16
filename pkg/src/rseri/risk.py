"""Binary risk indicators and the composite RSERI score.

Orientation: a higher score means more stress. ``resilience = 1 - rseri``
if the complementary reading is wanted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Optional, Sequence, Tuple

import numpy as np

from .raster import LulcCategory, NdviClass

COMPOSITE = ("flood", "lst", "grid", "road", "vegetation")
INDICATORS = ("flood", "lst", "grid", "road", "ndvi", "lulc", "vegetation")

GRID_THRESHOLD_M = 5000.0
ROAD_THRESHOLD_M = 2000.0
CLASS_LOW_MAX = 1.0 / 3.0
CLASS_MODERATE_MAX = 2.0 / 3.0

JACOBI_TOL = 1e-10
JACOBI_MAX_SWEEPS = 100


class IncompleteRiskVector(ValueError):
    def __init__(self, missing):
        self.missing = frozenset(missing)
        super().__init__("missing composite indicator(s): "
                         + ", ".join(sorted(self.missing)))


@dataclass(frozen=True)
class RiskVector:
    flood: Optional[int] = None
    lst: Optional[int] = None
    grid: Optional[int] = None
    road: Optional[int] = None
    ndvi: Optional[int] = None
    lulc: Optional[int] = None
    vegetation: Optional[int] = None

    @property
    def missing(self) -> FrozenSet[str]:
        return frozenset(n for n in INDICATORS if getattr(self, n) is None)

    @property
    def complete(self) -> bool:
        return all(getattr(self, n) is not None for n in COMPOSITE)

    def composite(self) -> Tuple[int, ...]:
        miss = [n for n in COMPOSITE if getattr(self, n) is None]
        if miss:
            raise IncompleteRiskVector(miss)
        return tuple(getattr(self, n) for n in COMPOSITE)

    def as_dict(self) -> Dict[str, Optional[int]]:
        return {n: getattr(self, n) for n in INDICATORS}


# --------------------------------------------------------------------------
# Indicators. All comparisons are strict: a value on a threshold is low risk.

def flood_indicator(q, flood_polygons) -> int:
    """1 iff ``q`` falls in any flood polygon.

    ``flood_polygons`` is anything with a ``contains(q)`` method (such as
    ``FeatureDistanceIndex``) or an iterable of ``Polygon``.
    """
    if hasattr(flood_polygons, "contains"):
        return int(flood_polygons.contains(q))
    from .geo import point_in_polygon
    return int(any(point_in_polygon(q, p) for p in flood_polygons))


def lst_indicator(lst_value: Optional[float], threshold: float) -> Optional[int]:
    if lst_value is None:
        return None
    return int(lst_value > threshold)


def grid_indicator(substation_dist: float,
                   threshold: float = GRID_THRESHOLD_M) -> int:
    if substation_dist < 0:
        raise ValueError(f"negative distance {substation_dist}")
    return int(substation_dist > threshold)


def road_indicator(road_dist: float, threshold: float = ROAD_THRESHOLD_M) -> int:
    if road_dist < 0:
        raise ValueError(f"negative distance {road_dist}")
    return int(road_dist > threshold)


def ndvi_indicator(ndvi_class: Optional[NdviClass]) -> Optional[int]:
    if ndvi_class is None:
        return None
    return int(ndvi_class == NdviClass.LOW)


def lulc_indicator(category: Optional[LulcCategory]) -> Optional[int]:
    """Urban or coastal land cover. Diagnostic only, not in the composite."""
    if category is None:
        return None
    return int(category in (LulcCategory.URBAN, LulcCategory.COASTAL))


def vegetation_indicator(ndvi_class: Optional[NdviClass],
                         lulc_category: Optional[LulcCategory]) -> Optional[int]:
    if ndvi_class is None or lulc_category is None:
        return None
    return int(ndvi_class == NdviClass.LOW and lulc_category in
               (LulcCategory.URBAN, LulcCategory.VEGETATION))


def normalize_minmax(values: Sequence[float]) -> list:
    if not values:
        raise ValueError("nothing to normalise")
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0] * len(values)
    span = hi - lo
    return [(v - lo) / span for v in values]


# --------------------------------------------------------------------------
# Weights and scores

@dataclass(frozen=True)
class WeightScheme:
    kind: str
    weights: Tuple[float, ...]
    info: Dict[str, object] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if self.kind not in ("equal", "pca", "custom"):
            raise ValueError(f"unknown weight scheme {self.kind!r}")
        if len(w) != len(COMPOSITE):
            raise ValueError(f"need {len(COMPOSITE)} weights, got {len(w)}")
        if any(not math.isfinite(x) or x < 0 for x in w):
            raise ValueError(f"weights must be finite and >= 0: {w}")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {math.fsum(w)}, not 1")

    @classmethod
    def equal(cls) -> "WeightScheme":
        n = len(COMPOSITE)
        return cls("equal", (1.0 / n,) * n)

    @classmethod
    def custom(cls, weights: Sequence[float]) -> "WeightScheme":
        return cls("custom", tuple(weights))

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(COMPOSITE, self.weights))


@dataclass(frozen=True)
class RseriScore:
    value: float
    weights_used: Tuple[float, ...]
    rseri_class: str


def rseri_value(bits: Sequence[float], scheme: WeightScheme) -> float:
    if scheme.kind == "equal":
        # exact mean: k/5 rather than an accumulated 0.2 + 0.2 + ...
        return sum(bits) / len(bits)
    total = 0.0
    for w, x in zip(scheme.weights, bits):
        total += w * x
    return min(max(total, 0.0), 1.0)


def compute_rseri(risk: RiskVector, scheme: WeightScheme,
                  low_max: float = CLASS_LOW_MAX,
                  moderate_max: float = CLASS_MODERATE_MAX) -> RseriScore:
    """Weighted composite of the five Table-1 style indicators.

    Raises ``IncompleteRiskVector`` when any composite input is missing;
    such stations are excluded from scoring.
    """
    value = rseri_value(risk.composite(), scheme)
    return RseriScore(value, scheme.weights,
                      classify_rseri(value, low_max, moderate_max))


def classify_rseri(value: float, low_max: float = CLASS_LOW_MAX,
                   moderate_max: float = CLASS_MODERATE_MAX) -> str:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"RSERI {value} outside [0, 1]")
    if value < low_max:
        return "Low"
    if value < moderate_max:
        return "Moderate"
    return "High"


def jacobi_eigh(c, tol: float = JACOBI_TOL,
                max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors as columns, in
    the original diagonal order (unsorted).
    """
    a = np.array(c, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=1e-12):
        raise ValueError("matrix must be square and symmetric")
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[i, j] ** 2 for i in range(n)
                            for j in range(n) if i != j))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta)
                                                 + math.sqrt(theta * theta + 1))
                cs = 1.0 / math.sqrt(t * t + 1)
                sn = t * cs
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = cs
                rot[p, q] = sn
                rot[q, p] = -sn
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    return np.diag(a).copy(), v


def covariance(matrix) -> np.ndarray:
    x = np.asarray(matrix, dtype=np.float64)
    xc = x - x.mean(axis=0)
    return (xc.T @ xc) / (x.shape[0] - 1)


def leading_eigenpair(c) -> Tuple[float, np.ndarray]:
    vals, vecs = jacobi_eigh(c)
    top = float(vals.max())
    scale = max(abs(top), 1.0)
    # ties go to the lowest index
    idx = next(i for i, lam in enumerate(vals) if top - lam <= 1e-12 * scale)
    vec = vecs[:, idx].copy()
    mags = np.abs(vec)
    lead = next(i for i, m in enumerate(mags) if mags.max() - m <= 1e-12)
    if vec[lead] < 0:
        vec = -vec
    return float(vals[idx]), vec


def pca_weights(matrix) -> WeightScheme:
    """Weights from the leading principal component of the indicator matrix.

    The loading vector is oriented so its largest entry is positive,
    negative loadings are clamped to zero and the rest rescaled to sum to 1.
    """
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != len(COMPOSITE):
        raise ValueError(f"expected an n x {len(COMPOSITE)} matrix")
    if x.shape[0] < len(COMPOSITE):
        raise ValueError(f"need at least {len(COMPOSITE)} rows, got {x.shape[0]}")
    if np.all(x.max(axis=0) == x.min(axis=0)):
        raise ValueError("all indicator columns are constant; no variance")
    c = covariance(x)
    lam, vec = leading_eigenpair(c)
    w = np.clip(vec, 0.0, None)
    w = w / w.sum()
    w[np.argmax(w)] += 1.0 - math.fsum(w)  # keep the sum exact
    return WeightScheme("pca", tuple(float(v) for v in w),
                        {"eigenvalue": lam,
                         "loadings": [float(v) for v in vec],
                         "explained_variance_ratio": lam / float(np.trace(c))})
