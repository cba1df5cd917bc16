import itertools
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rseri.geo import Polygon
from rseri.raster import LulcCategory as L, NdviClass as N
from rseri.risk import (COMPOSITE, IncompleteRiskVector, RiskVector,
                        WeightScheme, classify_rseri, compute_rseri,
                        covariance, flood_indicator, grid_indicator,
                        jacobi_eigh, leading_eigenpair, lst_indicator,
                        lulc_indicator, ndvi_indicator, normalize_minmax,
                        pca_weights, road_indicator, rseri_value,
                        vegetation_indicator)

ZONE = Polygon(((0, 0), (100, 0), (100, 100), (0, 100), (0, 0)))


def rv(bits):
    return RiskVector(**dict(zip(COMPOSITE, bits)))


def test_flood():
    assert flood_indicator((50, 50), [ZONE]) == 1
    assert flood_indicator((10100, 50), [ZONE]) == 0
    assert flood_indicator((0, 50), [ZONE]) == 1


def test_strict_thresholds():
    assert lst_indicator(30.0, 30.0) == 0
    assert lst_indicator(30.1, 30.0) == 1
    assert lst_indicator(None, 30.0) is None
    assert grid_indicator(5000.0) == 0
    assert grid_indicator(5000.1) == 1
    assert road_indicator(0.0) == 0
    assert road_indicator(2500.0) == 1
    with pytest.raises(ValueError):
        road_indicator(-1.0)


def test_vegetation_and_lulc():
    assert vegetation_indicator(N.LOW, L.URBAN) == 1
    assert vegetation_indicator(N.LOW, L.VEGETATION) == 1
    assert vegetation_indicator(N.LOW, L.WATER) == 0
    assert vegetation_indicator(N.HIGH, L.URBAN) == 0
    assert vegetation_indicator(None, L.URBAN) is None
    assert lulc_indicator(L.URBAN) == 1
    assert lulc_indicator(L.VEGETATION) == 0
    assert lulc_indicator(L.COASTAL) == 1
    assert ndvi_indicator(N.LOW) == 1 and ndvi_indicator(N.MODERATE) == 0


def test_normalize():
    assert normalize_minmax([0, 5, 10]) == [0, 0.5, 1]
    assert normalize_minmax([7, 7, 7]) == [0, 0, 0]


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_normalize_range(xs):
    out = normalize_minmax(xs)
    assert all(0.0 <= v <= 1.0 for v in out)


def test_rseri_examples():
    eq = WeightScheme.equal()
    assert compute_rseri(rv((0, 0, 0, 0, 0)), eq).value == 0.0
    s = compute_rseri(rv((1, 1, 1, 0, 0)), eq)
    assert s.value == 0.6 and s.rseri_class == "Moderate"
    flood_only = WeightScheme.custom((1, 0, 0, 0, 0))
    for bits in itertools.product((0, 1), repeat=5):
        assert compute_rseri(rv(bits), flood_only).value == bits[0]


def test_incomplete_vector_raises():
    with pytest.raises(IncompleteRiskVector) as exc:
        compute_rseri(RiskVector(flood=1, lst=0, grid=0, road=0),
                      WeightScheme.equal())
    assert exc.value.missing == {"vegetation"}


def test_weight_scheme_validation():
    with pytest.raises(ValueError):
        WeightScheme.custom((0.5, 0.5, 0.5, 0, 0))
    with pytest.raises(ValueError):
        WeightScheme.custom((1.2, -0.2, 0, 0, 0))
    with pytest.raises(ValueError):
        WeightScheme.custom((1, 0, 0, 0))


def test_classes():
    assert classify_rseri(0.0) == "Low"
    assert classify_rseri(0.5) == "Moderate"
    assert classify_rseri(0.8) == "High"
    assert classify_rseri(0.2) == "Low"
    assert classify_rseri(0.4) == "Moderate"
    assert classify_rseri(1.0) == "High"


def test_equal_weights_exact_mean():
    for bits in itertools.product((0, 1), repeat=5):
        assert rseri_value(bits, WeightScheme.equal()) == sum(bits) / 5


def random_scheme(rng):
    w = [rng.random() for _ in range(5)]
    w = [x / sum(w) for x in w]
    w[0] += 1.0 - sum(w)
    return WeightScheme.custom(w)


def test_monotone_under_flips():
    rng = random.Random(0)
    schemes = [WeightScheme.equal()] + [random_scheme(rng) for _ in range(100)]
    for scheme in schemes:
        for bits in itertools.product((0, 1), repeat=5):
            base = rseri_value(bits, scheme)
            for i in range(5):
                if bits[i] == 0:
                    up = list(bits)
                    up[i] = 1
                    assert rseri_value(up, scheme) >= base


# PCA ----------------------------------------------------------------------

def test_jacobi_matches_numpy():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = rng.normal(size=(5, 5))
        c = a @ a.T
        vals, vecs = jacobi_eigh(c)
        assert np.allclose(np.sort(vals), np.linalg.eigvalsh(c), atol=1e-9)
        assert np.allclose(c @ vecs, vecs * vals, atol=1e-8)


def test_two_correlated_columns():
    rng = random.Random(4)
    col = [rng.randint(0, 1) for _ in range(200)]
    col[0], col[1] = 0, 1
    x = np.array([[c, c, 0, 0, 0] for c in col])
    w = pca_weights(x).weights
    assert w == pytest.approx((0.5, 0.5, 0, 0, 0), abs=1e-9)
    assert sum(w) == 1.0


def test_identity_covariance_picks_first_column():
    x = np.vstack([np.eye(5), -np.eye(5)]) * np.sqrt(9 / 2)
    assert np.allclose(covariance(x), np.eye(5))
    w = pca_weights(x).weights
    assert w == (1.0, 0.0, 0.0, 0.0, 0.0)


def test_random_binary_residual():
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.integers(0, 2, size=(200, 5)).astype(float)
        c = covariance(x)
        lam, v = leading_eigenpair(c)
        assert np.linalg.norm(c @ v - lam * v) < 1e-8
        assert lam == pytest.approx(np.linalg.eigvalsh(c)[-1], abs=1e-10)
        w = pca_weights(x)
        assert abs(sum(w.weights) - 1.0) <= 1e-12
        assert all(v >= 0 for v in w.weights)


def test_pca_needs_variance_and_rows():
    with pytest.raises(ValueError):
        pca_weights(np.ones((10, 5)))
    with pytest.raises(ValueError):
        pca_weights(np.eye(5)[:4])


def test_covariance_matches_numpy():
    x = np.random.default_rng(2).normal(size=(40, 5))
    assert np.allclose(covariance(x), np.cov(x, rowvar=False), atol=1e-14)
