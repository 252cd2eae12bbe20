"""ADMM for the length-squared-over-area segmentation energy.

Splitting: the binary labeling ``y`` is copied into a relaxed vector ``z``
and the area ``1^T z`` into a scalar ``s``; the compactness term becomes
``(lam / s) (y^T L y)(z^T L z)``. Each cycle updates, in order,

1. ``z``: a shifted-Laplacian linear solve with a rank-one correction,
2. ``s``: the real root of a monic cubic,
3. ``y``: a submodular graph cut,
4. the scaled duals ``nu1`` (for ``y = z``) and ``nu2`` (for ``s = 1^T z``),

then grows both penalties geometrically.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .baselines import threshold_segment
from .cubic import solve_s
from .energy import EnergyReport, evaluate
from .errors import InputError, SolverError
from .grid import WeightedGraph, quadratic_form
from .linsolve import SolverConfig, z_update
from .maxflow import y_update

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdmmConfig:
    lam: float
    mu1_init: float = 2000.0
    mu2_init: float = 50.0
    growth: float = 1.01
    eps_conv: float = 1e-3
    max_iters: int = 200
    s_min: float = 1e-6
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise InputError(f"lambda must be finite and >= 0, got {self.lam}")
        for name in ("mu1_init", "mu2_init", "eps_conv", "s_min"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be > 0")
        if not self.growth >= 1:
            raise InputError(f"growth must be >= 1, got {self.growth}")
        if self.max_iters < 1:
            raise InputError("max_iters must be >= 1")


@dataclass
class IterationScratch:
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    q: np.ndarray | None = None


@dataclass
class AdmmState:
    y: np.ndarray
    z: np.ndarray
    s: float
    nu1: np.ndarray
    nu2: float
    mu1: float
    mu2: float
    iter: int = 0
    scratch: IterationScratch = field(default_factory=IterationScratch)


TRACE_FIELDS = (
    "iter", "E", "E_p", "E_c", "P", "A", "res_yz", "res_s",
    "alpha", "beta", "gamma", "s", "mu1", "mu2", "pcg_iters",
)


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    E: float
    E_p: float
    E_c: float
    P: float
    A: int
    res_yz: float
    res_s: float
    alpha: float
    beta: float
    gamma: float
    s: float
    mu1: float
    mu2: float
    pcg_iters: int

    def as_row(self) -> tuple:
        return tuple(getattr(self, f) for f in TRACE_FIELDS)


@dataclass
class Trace:
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, k):
        return self.records[k]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


@dataclass
class AdmmResult:
    y: np.ndarray
    report: EnergyReport
    trace: Trace
    converged: bool
    state: AdmmState

    @property
    def iterations(self) -> int:
        return self.state.iter


def residuals(state: AdmmState) -> tuple[float, float]:
    """RMS ``||y - z||`` and ``|s - 1^T z| / |Omega|``."""
    n = state.z.size
    d = state.y - state.z
    res_yz = math.sqrt(float(np.dot(d, d)) / n)
    res_s = abs(state.s - float(state.z.sum())) / n
    return res_yz, res_s


def initialize(u, graph: WeightedGraph, cfg: AdmmConfig) -> AdmmState:
    """Start from the thresholded unaries with zero duals."""
    u = np.asarray(u, dtype=np.float64)
    graph.domain.check_vector(u, "unary field")
    y = threshold_segment(u)
    z = y.astype(np.float64)
    return AdmmState(
        y=y,
        z=z,
        s=max(float(z.sum()), cfg.s_min),
        nu1=np.zeros_like(z),
        nu2=0.0,
        mu1=cfg.mu1_init,
        mu2=cfg.mu2_init,
    )


def iterate(state: AdmmState, u, graph: WeightedGraph, cfg: AdmmConfig, trace: Trace | None = None):
    """One z, s, y, dual, penalty cycle. Returns a new state."""
    lam = cfg.lam
    mu1, mu2 = state.mu1, state.mu2
    y_prev = state.y.astype(np.float64)

    perim_y = quadratic_form(graph, y_prev)
    alpha = lam * perim_y / max(state.s, cfg.s_min)
    z, pcg_iters = z_update(
        y_prev, state.nu1, state.s, state.nu2, alpha, mu1, mu2, graph, cfg.solver, x0=state.z
    )

    perim_z = quadratic_form(graph, z)
    beta = lam * perim_y * perim_z
    z_sum = float(z.sum())
    s = max(float(solve_s(z_sum - state.nu2, beta / mu2)), cfg.s_min)

    gamma = lam * perim_z / s
    q = z - state.nu1
    y = y_update(u, q, gamma, mu1, graph)

    yf = y.astype(np.float64)
    new = AdmmState(
        y=y,
        z=z,
        s=s,
        nu1=state.nu1 + (yf - z),
        nu2=state.nu2 + (s - z_sum),
        mu1=mu1 * cfg.growth,
        mu2=mu2 * cfg.growth,
        iter=state.iter + 1,
        scratch=IterationScratch(alpha=alpha, beta=beta, gamma=gamma, q=q),
    )
    if trace is not None:
        rep = evaluate(y, u, graph, lam)
        res_yz, res_s = residuals(new)
        trace.records.append(
            TraceRecord(
                iter=new.iter, E=rep.energy, E_p=rep.unary, E_c=rep.compactness,
                P=rep.perimeter, A=rep.area, res_yz=res_yz, res_s=res_s,
                alpha=alpha, beta=beta, gamma=gamma, s=s, mu1=mu1, mu2=mu2,
                pcg_iters=pcg_iters,
            )
        )
    return new


def converged(state: AdmmState, cfg: AdmmConfig) -> bool:
    res_yz, res_s = residuals(state)
    return res_yz <= cfg.eps_conv and res_s <= cfg.eps_conv


def run(u, graph: WeightedGraph, cfg: AdmmConfig) -> AdmmResult:
    """Minimise the compactness energy from the thresholding initialisation.

    Stops once both normalised primal residuals are at most
    ``cfg.eps_conv`` or after ``cfg.max_iters`` cycles. A
    :class:`SolverError` raised mid-run carries the partial trace in its
    ``trace`` attribute.
    """
    u = np.asarray(u, dtype=np.float64)
    state = initialize(u, graph, cfg)
    trace = Trace()
    done = False
    while state.iter < cfg.max_iters:
        try:
            state = iterate(state, u, graph, cfg, trace)
        except SolverError as exc:
            exc.trace = trace
            raise
        if converged(state, cfg):
            done = True
            break
    report = evaluate(state.y, u, graph, cfg.lam)
    if report.empty:
        log.warning("ADMM returned an empty region")
    if not done:
        log.info("ADMM stopped at max_iters=%d without converging", cfg.max_iters)
    return AdmmResult(y=state.y, report=report, trace=trace, converged=done, state=state)


def with_lambda(cfg: AdmmConfig, lam: float) -> AdmmConfig:
    return replace(cfg, lam=lam)
