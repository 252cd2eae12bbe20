import numpy as np
import pytest

from compactseg.errors import ConfigurationError
from compactseg.grid import (
    FeatureImage,
    GridDomain,
    WeightConfig,
    apply_feature_weights,
    build_edges,
    laplacian_matvec,
    quadratic_form,
)

from conftest import grid_graph, single_pixel


@pytest.mark.parametrize(
    "dims, conn, expected",
    [((2, 2), 4, 4), ((3, 3), 4, 12), ((2, 2, 2), 6, 12), ((3, 3), 8, 20), ((2, 2, 2), 26, 28)],
)
def test_edge_counts(dims, conn, expected):
    assert grid_graph(dims, conn).n_edges == expected


def test_default_connectivity():
    assert grid_graph((3, 3)).connectivity == 4
    assert grid_graph((2, 2, 2)).connectivity == 6


def test_bad_connectivity_rejected():
    with pytest.raises(ConfigurationError):
        grid_graph((3, 3), 6)


def test_pixel_order_is_x_fastest():
    d = GridDomain((3, 2))
    assert d.index((1, 0)) == 1
    assert d.index((0, 1)) == 3
    assert d.coord(4) == (1, 1)
    img = np.arange(6).reshape(3, 2, order="F")
    assert np.array_equal(d.unravel(d.ravel(img)), img)


def _features(values, dims):
    d = GridDomain(dims)
    return FeatureImage(d, np.asarray(values, dtype=float).reshape(d.size, -1))


def test_feature_weight_exp_minus_one():
    g = grid_graph((2, 1))
    w = apply_feature_weights(g, _features([0.0, 1.0], (2, 1)), WeightConfig(sigma=(1.0,), uniform=False))
    assert w.w[0] == pytest.approx(np.exp(-1.0), rel=1e-15)
    assert w.w[0] == pytest.approx(0.367879, abs=1e-6)


def test_feature_weight_equal_features_and_zero_sigma():
    g = grid_graph((3, 3))
    flat = _features(np.full(9, 7.0), (3, 3))
    assert np.all(apply_feature_weights(g, flat, WeightConfig(sigma=(2.0,), uniform=False)).w == 1.0)
    noisy = _features(np.random.default_rng(0).normal(size=9), (3, 3))
    assert np.all(apply_feature_weights(g, noisy, WeightConfig(sigma=(0.0,), uniform=False)).w == 1.0)


def test_feature_weights_symmetric_in_edge_order(rng):
    d = GridDomain((5, 4))
    g = build_edges(d, 8)
    f = FeatureImage(d, rng.normal(size=(d.size, 2)))
    cfg = WeightConfig(sigma=(0.7, 1.3), uniform=False)
    w = apply_feature_weights(g, f, cfg).w
    diff = f.values[g.j] - f.values[g.i]
    assert np.array_equal(w, np.exp(-(diff**2) @ np.array([0.7, 1.3])))


def test_quadratic_form_examples():
    g = grid_graph((3, 3), 4)
    assert quadratic_form(g, np.ones(9)) == 0.0
    assert quadratic_form(g, single_pixel((3, 3), (1, 1))) == 4.0
    assert quadratic_form(grid_graph((2, 2), 4), np.array([1, 0, 0, 1])) == 4.0


def test_laplacian_matvec_examples():
    g = grid_graph((2, 1))
    assert np.array_equal(laplacian_matvec(g, np.array([1.0, 0.0])), [1.0, -1.0])
    big = grid_graph((7, 5, 3), 26).with_weights(np.random.default_rng(1).random(grid_graph((7, 5, 3), 26).n_edges))
    assert np.all(laplacian_matvec(big, np.ones(big.domain.size)) == 0.0)


@pytest.mark.parametrize("dims, conn", [((6, 5), 4), ((6, 5), 8), ((4, 3, 3), 6), ((4, 3, 3), 26)])
def test_matvec_matches_quadratic_form(dims, conn, rng):
    g = grid_graph(dims, conn)
    g = g.with_weights(rng.random(g.n_edges))
    v = rng.normal(size=g.domain.size)
    assert float(v @ laplacian_matvec(g, v)) == pytest.approx(quadratic_form(g, v), rel=1e-12)
    assert np.allclose(g.dense_laplacian() @ v, laplacian_matvec(g, v), rtol=0, atol=1e-12)


@pytest.mark.parametrize("conn", [4, 8])
def test_quadratic_form_translation_invariant(conn, rng):
    d = GridDomain((12, 12))
    g = build_edges(d, conn)
    img = np.zeros((12, 12), np.uint8)
    img[2:6, 3:7] = rng.integers(0, 2, size=(4, 4))
    shifted = np.roll(np.roll(img, 4, axis=0), 3, axis=1)
    assert quadratic_form(g, d.ravel(img)) == quadratic_form(g, d.ravel(shifted))


def test_graph_arrays_are_read_only():
    g = grid_graph((3, 3))
    with pytest.raises(ValueError):
        g.w[0] = 2.0
