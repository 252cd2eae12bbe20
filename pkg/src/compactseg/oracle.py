"""Exhaustive minimisers for tiny instances, used only for validation.

Energies here are recomputed from raw edge lists with bit arithmetic and
share no code with :mod:`compactseg.energy` or :mod:`compactseg.maxflow`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError

MAX_PIXELS = 20


@dataclass(frozen=True)
class OracleLimit:
    max_pixels: int = MAX_PIXELS

    def __post_init__(self):
        if not 1 <= self.max_pixels <= MAX_PIXELS:
            raise InputError(f"max_pixels must lie in [1, {MAX_PIXELS}]")


def _all_labelings(n: int) -> np.ndarray:
    """``(2**n, n)`` uint8 bit matrix; row ``k`` encodes ``k`` with pixel 0 as LSB."""
    codes = np.arange(1 << n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def _edge_arrays(graph):
    return (
        np.array(graph.i, dtype=np.int64),
        np.array(graph.j, dtype=np.int64),
        np.array(graph.w, dtype=np.float64),
    )


def _check(graph, limit: OracleLimit):
    n = graph.domain.size
    if n > limit.max_pixels:
        raise InputError(f"domain has {n} pixels; oracle limit is {limit.max_pixels}")
    return n


def _cut_weight(bits: np.ndarray, ei, ej, ew) -> np.ndarray:
    disagree = np.bitwise_xor(bits[:, ei], bits[:, ej]).astype(np.float64)
    return disagree @ ew


def full_energies(u, graph, lam: float) -> np.ndarray:
    """Energy of every labeling, indexed by its binary encoding."""
    n = graph.domain.size
    bits = _all_labelings(n)
    u = np.array(u, dtype=np.float64)
    ei, ej, ew = _edge_arrays(graph)
    unary = bits.astype(np.float64) @ u
    perim = _cut_weight(bits, ei, ej, ew)
    area = bits.sum(axis=1, dtype=np.int64)
    comp = np.zeros_like(perim)
    nz = area > 0
    comp[nz] = perim[nz] ** 2 / area[nz]
    return unary + lam * comp


def brute_force_full(u, graph, lam: float, limit: OracleLimit = OracleLimit()):
    """Global minimiser of the compactness energy by enumeration.

    Returns ``(y, energy)``; ties go to the smallest binary encoding.
    """
    n = _check(graph, limit)
    if lam < 0:
        raise InputError("lambda must be >= 0")
    energies = full_energies(u, graph, lam)
    k = int(np.argmin(energies))
    return _decode(k, n), float(energies[k])


def brute_force_pairwise(theta, pair_weight: float, graph, limit: OracleLimit = OracleLimit()):
    """Global minimiser of ``theta.y + pair_weight * sum w_ij |y_i - y_j|``."""
    n = _check(graph, limit)
    if pair_weight < 0:
        raise InputError("pair_weight must be >= 0")
    bits = _all_labelings(n)
    ei, ej, ew = _edge_arrays(graph)
    values = bits.astype(np.float64) @ np.array(theta, dtype=np.float64)
    values = values + pair_weight * _cut_weight(bits, ei, ej, ew)
    k = int(np.argmin(values))
    return _decode(k, n), float(values[k])


def labeling_energy(y, u, graph, lam: float) -> float:
    """Single-labeling energy via the oracle's own arithmetic."""
    y = np.array(y, dtype=np.uint8)[None, :]
    ei, ej, ew = _edge_arrays(graph)
    unary = float(y.astype(np.float64)[0] @ np.array(u, dtype=np.float64))
    perim = float(_cut_weight(y, ei, ej, ew)[0])
    area = int(y.sum())
    return unary + (lam * perim**2 / area if area else 0.0)


def _decode(code: int, n: int) -> np.ndarray:
    return np.array([(code >> k) & 1 for k in range(n)], dtype=np.uint8)
