import numpy as np

from compactseg.baselines import gc_sweep_values, graphcut_segment, threshold_segment
from compactseg.energy import unary_from_probability
from compactseg.maxflow import PairwiseProblem
from compactseg.oracle import brute_force_pairwise

from conftest import grid_graph


def test_threshold_examples():
    assert threshold_segment(np.array([-1.0, 1.0])).tolist() == [1, 0]
    assert threshold_segment(np.zeros(4)).tolist() == [0, 0, 0, 0]
    u = unary_from_probability(np.array([0.9, 0.1, 0.5]))
    assert threshold_segment(u).tolist() == [1, 0, 0]


def test_gc_zero_equals_threshold(rng):
    g = grid_graph((6, 6))
    u = rng.normal(size=36)
    u[:4] = 0.0
    assert np.array_equal(graphcut_segment(u, 0.0, g), threshold_segment(u))


def test_gc_huge_is_constant(rng):
    g = grid_graph((6, 6))
    u = rng.normal(size=36)
    y = graphcut_segment(u, 1e9, g)
    assert y.min() == y.max()
    assert y[0] == (1 if u.sum() < 0 else 0)


def test_gc_matches_brute_force(rng):
    g = grid_graph((4, 4))
    for _ in range(20):
        u = rng.normal(size=16)
        lam = float(rng.uniform(0, 2))
        y = graphcut_segment(u, lam, g)
        _, best = brute_force_pairwise(u, lam, g)
        assert abs(PairwiseProblem(u, lam, g).value(y) - best) <= 1e-9


def test_sweep_grid():
    u = np.array([-2.0, 1.0, 4.0, -0.5, 3.0])
    vals = gc_sweep_values(u)
    assert len(vals) == 20
    assert np.isclose(vals[0], 0.01 * 2.0) and np.isclose(vals[-1], 100 * 2.0)
    assert np.allclose(np.diff(np.log(vals)), np.log(vals[1] / vals[0]))
