"""Linear solves for the relaxed-variable update.

The system matrix is ``alpha*L + mu1*I + mu2*11^T``. The dense rank-one
part never gets assembled: ``Q = alpha*L + mu1*I`` maps constants to
constants (``L 1 = 0``), so its inverse on the constant direction is
analytic and the rank-one term is removed with the Woodbury identity.
Only the zero-mean part of the right-hand side goes through PCG.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, SolverError
from .grid import WeightedGraph, laplacian_matvec


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-8
    max_iterations: int = 1000

    def __post_init__(self):
        if not self.tolerance > 0:
            raise InputError(f"solver tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise InputError("max_iterations must be >= 1")


@dataclass(frozen=True)
class ShiftedLaplacianOperator:
    """Matrix-free ``Q = alpha*L + mu1*I``."""

    graph: WeightedGraph
    alpha: float
    mu1: float

    def __post_init__(self):
        if self.alpha < 0:
            raise InputError(f"alpha must be >= 0, got {self.alpha}")
        if not self.mu1 > 0:
            raise InputError(f"mu1 must be > 0, got {self.mu1}")

    @property
    def size(self) -> int:
        return self.graph.domain.size

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.mu1 * v
        if self.alpha != 0.0:
            out += self.alpha * laplacian_matvec(self.graph, v)
        return out

    def diagonal(self) -> np.ndarray:
        return self.alpha * self.graph.degree + self.mu1

    def dense(self) -> np.ndarray:
        return self.alpha * self.graph.dense_laplacian() + self.mu1 * np.eye(self.size)


def pcg_solve(op: ShiftedLaplacianOperator, b, cfg: SolverConfig = SolverConfig(), x0=None):
    """Jacobi-preconditioned conjugate gradients for ``Q x = b``.

    Returns
    -------
    x : ndarray
        Solution with ``||Q x - b|| <= tolerance * ||b||``.
    iterations : int
        Number of CG iterations performed.

    Raises
    ------
    SolverError
        If the true residual still exceeds the tolerance after
        ``cfg.max_iterations`` iterations.
    """
    b = np.asarray(b, dtype=np.float64)
    op.graph.domain.check_vector(b, "right-hand side")
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return np.zeros_like(b), 0
    target = cfg.tolerance * bnorm
    inv_diag = 1.0 / op.diagonal()
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=np.float64)

    iterations = 0
    rnorm = np.inf
    # outer loop restarts from the true residual if the recursive one drifted
    while iterations < cfg.max_iterations:
        r = b - op.matvec(x)
        rnorm = float(np.linalg.norm(r))
        if rnorm <= target:
            return x, iterations
        z = inv_diag * r
        p = z.copy()
        rz = float(np.dot(r, z))
        while iterations < cfg.max_iterations:
            ap = op.matvec(p)
            step = rz / float(np.dot(p, ap))
            x += step * p
            r -= step * ap
            iterations += 1
            if float(np.linalg.norm(r)) <= target:
                break
            z = inv_diag * r
            rz_new = float(np.dot(r, z))
            p = z + (rz_new / rz) * p
            rz = rz_new

    r = b - op.matvec(x)
    rnorm = float(np.linalg.norm(r))
    if rnorm <= target:
        return x, iterations
    raise SolverError(
        f"PCG did not reach relative residual {cfg.tolerance:g} in {iterations} iterations "
        f"(residual {rnorm / bnorm:.3e})",
        residual=rnorm / bnorm,
        iterations=iterations,
    )


def woodbury_correction(mu1: float, mu2: float, n: int) -> float:
    """Scalar ``c`` such that ``(Q + mu2 11^T)^-1 = Q^-1 - c 11^T``."""
    return 1.0 / (mu1 * (mu1 / mu2 + n))


def z_update(y, nu1, s, nu2, alpha, mu1, mu2, graph, cfg=SolverConfig(), x0=None):
    """Solve ``(alpha L + mu1 I + mu2 11^T) z = mu1 (y + nu1) + mu2 (s + nu2) 1``.

    ``x0`` warm-starts the inner solve (typically the previous ``z``).
    Returns ``(z, pcg_iterations)``.
    """
    if not (mu1 > 0 and mu2 > 0):
        raise InputError("mu1 and mu2 must be > 0")
    n = graph.domain.size
    y = np.asarray(y, dtype=np.float64)
    nu1 = np.asarray(nu1, dtype=np.float64)
    graph.domain.check_vector(y, "y")
    graph.domain.check_vector(nu1, "nu1")
    op = ShiftedLaplacianOperator(graph, float(alpha), float(mu1))

    b1 = mu1 * (y + nu1)
    shift = mu2 * (s + nu2)
    rhs_sum = float(b1.sum()) + n * shift

    # Q^-1 b1: constant part analytically, zero-mean part by PCG
    b1_mean = float(b1.mean())
    b0 = b1 - b1_mean
    guess = None
    if x0 is not None:
        guess = np.asarray(x0, dtype=np.float64)
        guess = guess - guess.mean()
    x, iters = pcg_solve(op, b0, cfg, guess)
    # Q keeps the zero-mean subspace invariant; projecting x back onto it
    # also projects the residual, so it can only shrink
    x -= x.mean()

    z = x + (b1_mean / mu1 + shift / mu1 - woodbury_correction(mu1, mu2, n) * rhs_sum)
    return z, iters


def full_system_dense(graph: WeightedGraph, alpha: float, mu1: float, mu2: float) -> np.ndarray:
    """Dense ``alpha L + mu1 I + mu2 11^T`` (reference use on small domains)."""
    n = graph.domain.size
    return alpha * graph.dense_laplacian() + mu1 * np.eye(n) + mu2 * np.ones((n, n))
