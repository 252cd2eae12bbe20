"""Synthetic ground-truth shapes and noisy foreground-probability maps.

Coordinates are pixel centres ``(x, y[, z])`` with ``x`` along the first
(fastest) axis; "up" means decreasing ``y``, as in image rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .errors import InputError
from .grid import GridDomain

KINDS = ("disk", "bar", "ring", "bifurcation")


@dataclass(frozen=True)
class PhantomSpec:
    """Shape plus noise model.

    Geometry fields left as ``None`` get size-relative defaults, see
    :func:`resolved`.
    """

    kind: str
    dims: tuple[int, ...] = (64, 64)
    center: tuple[float, ...] | None = None
    radius: float | None = None
    inner_radius: float | None = None
    width: float | None = None
    aspect: float = 8.0
    angle: float = 0.0
    branch_angle: float = 60.0
    p_in: float = 0.8
    p_out: float = 0.2
    sigma_n: float = 0.25
    blur: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown phantom kind {self.kind!r}; choose from {KINDS}")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        GridDomain(self.dims)
        if not 0 <= self.p_out < self.p_in <= 1:
            raise InputError("need 0 <= p_out < p_in <= 1")
        if self.sigma_n < 0 or self.blur < 0:
            raise InputError("noise and blur widths must be >= 0")
        if self.kind != "disk" and len(self.dims) != 2:
            raise InputError(f"{self.kind} phantoms are 2-D only")

    @property
    def domain(self) -> GridDomain:
        return GridDomain(self.dims)


def resolved(spec: PhantomSpec) -> PhantomSpec:
    """Fill unset geometry with defaults scaled to the domain."""
    m = min(spec.dims)
    center = spec.center
    if center is None:
        center = tuple((d - 1) / 2.0 for d in spec.dims)
    radius = spec.radius
    if radius is None:
        radius = m / 4.0 if spec.kind != "ring" else m / 3.0
    inner = spec.inner_radius if spec.inner_radius is not None else radius / 2.0
    width = spec.width
    if width is None:
        width = max(2.0, math.floor(0.9 * m / spec.aspect)) if spec.kind == "bar" else max(2.0, m / 10.0)
    return replace(spec, center=tuple(center), radius=radius, inner_radius=inner, width=width)


def _pixel_coords(dims):
    return np.indices(dims, dtype=np.float64)


def _segment_distance(px, py, a, b):
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    length2 = dx * dx + dy * dy
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / length2, 0.0, 1.0)
    return np.hypot(px - (ax + t * dx), py - (ay + t * dy))


def bifurcation_points(spec: PhantomSpec):
    """Trunk start, junction and the two branch tips of a resolved spec."""
    X, Y = spec.dims
    cx = spec.center[0]
    margin = spec.width / 2.0 + 1.0
    half = math.radians(spec.branch_angle) / 2.0
    # junction low enough that the branches are apart by the mid row
    sep = (spec.width + 2.0) / (2.0 * math.tan(half))
    jy = min(Y / 2.0 + sep, Y - 1 - margin - 1.0)
    bottom = (cx, Y - 1 - margin)
    top_y = margin
    reach = (jy - top_y) * math.tan(half)
    return bottom, (cx, jy), (cx - reach, top_y), (cx + reach, top_y)


def _shape_mask(spec: PhantomSpec) -> np.ndarray:
    coords = _pixel_coords(spec.dims)
    c = np.array(spec.center).reshape((-1,) + (1,) * len(spec.dims))
    rel = coords - c
    if spec.kind == "disk":
        return np.sum(rel * rel, axis=0) <= spec.radius**2
    if spec.kind == "ring":
        d2 = np.sum(rel * rel, axis=0)
        return (d2 <= spec.radius**2) & (d2 > spec.inner_radius**2)
    if spec.kind == "bar":
        th = math.radians(spec.angle)
        along = rel[0] * math.cos(th) + rel[1] * math.sin(th)
        across = -rel[0] * math.sin(th) + rel[1] * math.cos(th)
        length = spec.aspect * spec.width
        return (np.abs(along) <= length / 2.0) & (np.abs(across) <= spec.width / 2.0)
    bottom, junction, left, right = bifurcation_points(spec)
    px, py = coords
    r = spec.width / 2.0
    return (
        (_segment_distance(px, py, bottom, junction) <= r)
        | (_segment_distance(px, py, junction, left) <= r)
        | (_segment_distance(px, py, junction, right) <= r)
    )


def _check_fits(spec: PhantomSpec) -> None:
    dims = np.array(spec.dims, dtype=np.float64)
    c = np.array(spec.center)
    if spec.kind in ("disk", "ring"):
        lo, hi = c - spec.radius, c + spec.radius
    elif spec.kind == "bar":
        th = math.radians(spec.angle)
        hl, hw = spec.aspect * spec.width / 2.0, spec.width / 2.0
        ex = abs(hl * math.cos(th)) + abs(hw * math.sin(th))
        ey = abs(hl * math.sin(th)) + abs(hw * math.cos(th))
        lo, hi = c - [ex, ey], c + [ex, ey]
    else:
        pts = np.array(bifurcation_points(spec))
        r = spec.width / 2.0
        lo, hi = pts.min(axis=0) - r, pts.max(axis=0) + r
    if np.any(lo < 0) or np.any(hi > dims - 1):
        raise InputError(f"{spec.kind} phantom does not fit inside {spec.dims}")


def make_ground_truth(spec: PhantomSpec) -> np.ndarray:
    """Binary rasterisation (pixel centres inside the shape), flat pixel order."""
    spec = resolved(spec)
    if spec.kind in ("disk", "ring") and spec.radius <= 0:
        return np.zeros(spec.domain.size, np.uint8)
    _check_fits(spec)
    return spec.domain.ravel(_shape_mask(spec).astype(np.uint8))


def make_probability(gt, spec: PhantomSpec) -> np.ndarray:
    """Foreground probability ``clip(mean + N(0, sigma_n), 0, 1)``.

    ``mean`` is ``p_in`` on the ground truth and ``p_out`` elsewhere. The
    optional ``blur`` smooths the noisy map (Gaussian, in pixels) before
    clipping. Deterministic for a fixed ``seed``.
    """
    domain = spec.domain
    gt = np.asarray(gt)
    domain.check_vector(gt, "ground truth")
    rng = np.random.default_rng(spec.seed)
    mean = np.where(gt > 0, spec.p_in, spec.p_out)
    noisy = mean + spec.sigma_n * rng.standard_normal(domain.size)
    if spec.blur > 0:
        img = ndimage.gaussian_filter(domain.unravel(noisy), spec.blur, mode="nearest")
        noisy = domain.ravel(img)
    return np.clip(noisy, 0.0, 1.0)


def make_phantom(spec: PhantomSpec):
    """``(ground_truth, probability)`` pair."""
    gt = make_ground_truth(spec)
    return gt, make_probability(gt, spec)


def count_components(mask, domain: GridDomain, rows=None) -> int:
    """4/6-connected component count, optionally restricted to a row range (2-D)."""
    img = domain.unravel(np.asarray(mask)).astype(bool)
    if rows is not None:
        img = img[:, rows[0]:rows[1]]
    _, count = ndimage.label(img)
    return int(count)
