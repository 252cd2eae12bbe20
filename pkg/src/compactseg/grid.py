"""Pixel lattices, neighbour edges and the implicit graph Laplacian.

Images are stored as flat vectors with the first axis varying fastest
(``x + X*y + X*Y*z``), i.e. numpy arrays of shape ``dims`` raveled in
Fortran order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, InputError

VALID_CONNECTIVITY = {2: (4, 8), 3: (6, 26)}
DEFAULT_CONNECTIVITY = {2: 4, 3: 6}


@dataclass(frozen=True)
class GridDomain:
    """Rectangular 2D or 3D pixel lattice."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) not in (2, 3):
            raise ConfigurationError(f"expected 2 or 3 dims, got {len(dims)}")
        if any(d < 1 for d in dims):
            raise ConfigurationError(f"all dims must be >= 1, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def index(self, coord: Sequence[int]) -> int:
        if len(coord) != self.ndim or any(not 0 <= c < d for c, d in zip(coord, self.dims)):
            raise InputError(f"coordinate {tuple(coord)} outside {self.dims}")
        return int(np.ravel_multi_index(tuple(coord), self.dims, order="F"))

    def coord(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size:
            raise InputError(f"index {index} outside [0, {self.size})")
        return tuple(int(c) for c in np.unravel_index(index, self.dims, order="F"))

    def ravel(self, array) -> np.ndarray:
        """Flatten an array of shape ``dims`` to the linear pixel order."""
        array = np.asarray(array)
        if array.shape != self.dims:
            raise InputError(f"array shape {array.shape} does not match dims {self.dims}")
        return array.ravel(order="F")

    def unravel(self, vector) -> np.ndarray:
        vector = np.asarray(vector)
        self.check_vector(vector)
        return vector.reshape(self.dims, order="F")

    def check_vector(self, vector, name: str = "vector") -> None:
        if np.ndim(vector) != 1 or len(vector) != self.size:
            raise InputError(f"{name} must have length {self.size}, got shape {np.shape(vector)}")


@dataclass(frozen=True)
class FeatureImage:
    """Per-pixel feature vectors, ``values`` has shape ``(size, K)``."""

    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != self.domain.size:
            raise InputError(
                f"feature array shape {values.shape} incompatible with {self.domain.size} pixels"
            )
        if not np.all(np.isfinite(values)):
            raise InputError("feature values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class WeightConfig:
    connectivity: int | None = None
    sigma: tuple[float, ...] = ()
    uniform: bool = True

    def __post_init__(self):
        sigma = tuple(float(s) for s in self.sigma)
        if any(not np.isfinite(s) or s < 0 for s in sigma):
            raise ConfigurationError(f"sigma values must be finite and >= 0, got {sigma}")
        if not self.uniform and not sigma:
            raise ConfigurationError("non-uniform weights need at least one sigma value")
        object.__setattr__(self, "sigma", sigma)

    def resolve_connectivity(self, domain: GridDomain) -> int:
        conn = DEFAULT_CONNECTIVITY[domain.ndim] if self.connectivity is None else self.connectivity
        check_connectivity(domain, conn)
        return conn


def check_connectivity(domain: GridDomain, conn: int) -> None:
    if conn not in VALID_CONNECTIVITY[domain.ndim]:
        raise ConfigurationError(
            f"connectivity {conn} invalid for {domain.ndim}D; "
            f"choose one of {VALID_CONNECTIVITY[domain.ndim]}"
        )


def half_offsets(ndim: int, conn: int) -> list[tuple[int, ...]]:
    """Neighbour offsets with the last non-zero component positive.

    Each unordered neighbour pair is reached by exactly one of these, and
    the linear index always increases along it.
    """
    full = conn in (8, 26)
    out = []
    # itertools.product varies the last component fastest; iterate reversed
    # tuples so the first axis varies fastest, matching the pixel order.
    for rev in itertools.product((-1, 0, 1), repeat=ndim):
        off = rev[::-1]
        nz = [c for c in off if c != 0]
        if not nz or nz[-1] < 0:
            continue
        if not full and len(nz) != 1:
            continue
        out.append(off)
    return out


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected neighbour graph on a lattice; each pair stored once with ``i < j``."""

    domain: GridDomain
    i: np.ndarray
    j: np.ndarray
    w: np.ndarray
    connectivity: int = field(default=4)

    def __post_init__(self):
        i = np.ascontiguousarray(self.i, dtype=np.int64)
        j = np.ascontiguousarray(self.j, dtype=np.int64)
        w = np.ascontiguousarray(self.w, dtype=np.float64)
        if not (i.shape == j.shape == w.shape) or i.ndim != 1:
            raise InputError("edge arrays must be 1-D and equally long")
        if i.size and (np.any(i >= j) or i.min() < 0 or j.max() >= self.domain.size):
            raise InputError("edges must satisfy 0 <= i < j < size")
        if np.any(~np.isfinite(w)) or np.any(w < 0):
            raise InputError("edge weights must be finite and nonnegative")
        for name, arr in (("i", i), ("j", j), ("w", w)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_edges(self) -> int:
        return int(self.i.size)

    def with_weights(self, w) -> "WeightedGraph":
        return WeightedGraph(self.domain, self.i, self.j, w, self.connectivity)

    @cached_property
    def degree(self) -> np.ndarray:
        n = self.domain.size
        return np.bincount(self.i, self.w, n) + np.bincount(self.j, self.w, n)

    def quadratic_form(self, v) -> float:
        return quadratic_form(self, v)

    def laplacian_matvec(self, v) -> np.ndarray:
        return laplacian_matvec(self, v)

    def dense_laplacian(self) -> np.ndarray:
        """Explicit ``|Ω| x |Ω|`` Laplacian, for small reference computations only."""
        n = self.domain.size
        lap = np.zeros((n, n))
        np.add.at(lap, (self.i, self.j), -self.w)
        np.add.at(lap, (self.j, self.i), -self.w)
        lap[np.diag_indices(n)] = self.degree
        return lap


def build_edges(domain: GridDomain, conn: int | None = None) -> WeightedGraph:
    """Unit-weight neighbour graph of ``domain``.

    Edges are ordered by neighbour offset, then by the lower pixel index.
    """
    if conn is None:
        conn = DEFAULT_CONNECTIVITY[domain.ndim]
    check_connectivity(domain, conn)
    dims = np.array(domain.dims)
    coords = np.indices(domain.dims).reshape(domain.ndim, -1, order="F")
    lin = np.arange(domain.size, dtype=np.int64)
    strides = np.concatenate(([1], np.cumprod(dims[:-1])))
    i_parts, j_parts = [], []
    for off in half_offsets(domain.ndim, conn):
        off = np.array(off)
        target = coords + off[:, None]
        valid = np.all((target >= 0) & (target < dims[:, None]), axis=0)
        src = lin[valid]
        i_parts.append(src)
        j_parts.append(src + int(off @ strides))
    i = np.concatenate(i_parts) if i_parts else np.empty(0, np.int64)
    j = np.concatenate(j_parts) if j_parts else np.empty(0, np.int64)
    return WeightedGraph(domain, i, j, np.ones(i.size), conn)


def apply_feature_weights(
    graph: WeightedGraph, features: FeatureImage, cfg: WeightConfig
) -> WeightedGraph:
    """Replace edge weights by ``exp(-sum_k sigma_k (x_ik - x_jk)**2)``.

    With ``cfg.uniform`` set the graph is returned with unit weights.
    """
    if features.domain != graph.domain:
        raise InputError("feature image domain differs from graph domain")
    if cfg.uniform:
        return graph.with_weights(np.ones(graph.n_edges))
    sigma = np.asarray(cfg.sigma)
    if sigma.size != features.n_features:
        raise ConfigurationError(
            f"sigma has {sigma.size} entries for {features.n_features} features"
        )
    diff = features.values[graph.i] - features.values[graph.j]
    w = np.exp(-((diff * diff) @ sigma))
    return graph.with_weights(w)


def quadratic_form(graph: WeightedGraph, v) -> float:
    """``v^T L v`` computed as ``sum_edges w_ij (v_i - v_j)**2``."""
    v = np.asarray(v, dtype=np.float64)
    graph.domain.check_vector(v)
    d = v[graph.i] - v[graph.j]
    return float(np.dot(graph.w, d * d))


def laplacian_matvec(graph: WeightedGraph, v) -> np.ndarray:
    """``(L v)_i = sum_j w_ij (v_i - v_j)``; exactly zero for constant ``v``."""
    v = np.asarray(v, dtype=np.float64)
    graph.domain.check_vector(v)
    n = graph.domain.size
    flux = graph.w * (v[graph.i] - v[graph.j])
    return np.bincount(graph.i, flux, n) - np.bincount(graph.j, flux, n)
