"""Comparison segmenters: unary thresholding and plain graph-cut regularisation."""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .grid import WeightedGraph
from .maxflow import PairwiseProblem, min_cut

GC_SWEEP_RANGE = (1e-2, 1e2)
GC_SWEEP_POINTS = 20


def threshold_segment(u) -> np.ndarray:
    """Foreground where the unary favours it strictly (``u < 0``)."""
    u = np.asarray(u, dtype=np.float64)
    return (u < 0).astype(np.uint8)


def graphcut_segment(u, lam_gc: float, graph: WeightedGraph) -> np.ndarray:
    """Global minimiser of ``u.y + lam_gc * sum w_ij |y_i - y_j|``."""
    if lam_gc < 0:
        raise InputError(f"lam_gc must be >= 0, got {lam_gc}")
    return min_cut(PairwiseProblem(u, float(lam_gc), graph)).labels


def gc_sweep_values(u, n: int = GC_SWEEP_POINTS, span=GC_SWEEP_RANGE) -> np.ndarray:
    """Log-spaced ``lam_gc`` grid spanning ``span`` times the median ``|u|``."""
    scale = float(np.median(np.abs(u)))
    if scale == 0.0:
        scale = 1.0
    return scale * np.logspace(np.log10(span[0]), np.log10(span[1]), n)
