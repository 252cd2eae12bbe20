"""Segmentation energy: unary log-likelihood term plus length-squared over area."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .grid import WeightedGraph, quadratic_form

DEFAULT_PROB_CLAMP = 1e-6


@dataclass(frozen=True)
class EnergyReport:
    """Decomposed energy of one binary labeling.

    ``compactness`` is perimeter**2 / area, defined as 0 for the empty
    region; ``empty`` flags that case so callers can reject it.
    """

    unary: float
    perimeter: float
    area: int
    compactness: float
    energy: float
    lam: float

    @property
    def empty(self) -> bool:
        return self.area == 0

    def as_dict(self) -> dict:
        return {
            "E": self.energy,
            "E_p": self.unary,
            "P": self.perimeter,
            "A": self.area,
            "E_c": self.compactness,
            "lambda": self.lam,
            "empty": self.empty,
        }


def unary_from_probability(p, eps: float = DEFAULT_PROB_CLAMP) -> np.ndarray:
    """Unary potentials ``log(1 - p) - log(p)`` from foreground probabilities.

    Probabilities are clamped to ``[eps, 1 - eps]`` first, so saturated
    maps give finite costs. Negative values favour the foreground.
    """
    p = np.asarray(p, dtype=np.float64)
    if not 0 < eps < 0.5:
        raise InputError(f"clamp eps must lie in (0, 0.5), got {eps}")
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise InputError("probabilities must lie in [0, 1]")
    pc = np.clip(p, eps, 1.0 - eps)
    return np.log1p(-pc) - np.log(pc)


def check_binary(y, size: int | None = None) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or (size is not None and y.size != size):
        raise InputError(f"labeling must be a vector of length {size}, got shape {y.shape}")
    if not np.all((y == 0) | (y == 1)):
        raise InputError("labeling must be strictly binary")
    return y.astype(np.uint8, copy=False)


def evaluate(y, u, graph: WeightedGraph, lam: float) -> EnergyReport:
    """Evaluate ``u.y + lam * (y^T L y)**2 / (1^T y)`` for a binary ``y``."""
    n = graph.domain.size
    y = check_binary(y, n)
    u = np.asarray(u, dtype=np.float64)
    graph.domain.check_vector(u, "unary field")
    if lam < 0:
        raise InputError(f"lambda must be >= 0, got {lam}")
    yf = y.astype(np.float64)
    unary = float(np.dot(u, yf))
    perimeter = quadratic_form(graph, yf)
    area = int(y.sum(dtype=np.int64))
    compactness = perimeter * perimeter / area if area > 0 else 0.0
    return EnergyReport(
        unary=unary,
        perimeter=perimeter,
        area=area,
        compactness=compactness,
        energy=unary + lam * compactness,
        lam=float(lam),
    )
