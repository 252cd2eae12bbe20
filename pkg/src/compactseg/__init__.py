"""Binary segmentation under a length-squared-over-area compactness prior.

The energy ``u.y + lam * (y^T L y)**2 / (1^T y)`` is minimised by ADMM with
a Woodbury-corrected PCG solve, a closed-form cubic and a graph cut per
iteration.
"""

from .admm import AdmmConfig, AdmmResult, run
from .energy import EnergyReport, evaluate, unary_from_probability
from .grid import GridDomain, WeightConfig, WeightedGraph, build_edges
from .metrics import dice

__all__ = [
    "AdmmConfig",
    "AdmmResult",
    "EnergyReport",
    "GridDomain",
    "WeightConfig",
    "WeightedGraph",
    "build_edges",
    "dice",
    "evaluate",
    "run",
    "unary_from_probability",
]
__version__ = "0.1.0"
