"""Closed-form root of ``s**3 - c*s**2 = r`` for the area-variable update."""

from __future__ import annotations

import math

import numpy as np

from .errors import InputError

_NEWTON_STEPS = 2
_MAX_NEWTON = 100


def _cardano_largest(c: float, r: float) -> float:
    # substitute s = t + c/3: t^3 + p t + q = 0
    p = -c * c / 3.0
    q = -(2.0 * c**3 / 27.0 + r)
    half_q = 0.5 * q
    disc = half_q * half_q + (p / 3.0) ** 3
    if p == 0.0:
        return math.copysign(abs(q) ** (1.0 / 3.0), -q) + c / 3.0
    if disc > 0.0:
        # one real root; pick the cube-root branch free of cancellation and
        # recover the other from u*v = -p/3
        sq = math.sqrt(disc)
        a = -half_q + sq if half_q <= 0.0 else -half_q - sq
        u = math.copysign(abs(a) ** (1.0 / 3.0), a)
        t = u - p / (3.0 * u) if u != 0.0 else 0.0
    else:
        # three real roots (only possible for c < 0); the largest is k = 0
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        theta = math.acos(min(1.0, max(-1.0, arg)))
        t = m * math.cos(theta / 3.0)
    return t + c / 3.0


def _upper_bracket(c: float, r: float) -> float:
    """A point where ``s**2 * (s - c) >= r``, right of the root."""
    a = r ** (1.0 / 3.0)
    if c > 0.0:
        c2 = c * c
        return c + (min(a, r / c2) if c2 > 0.0 else a)
    if c < 0.0:
        return min(a, math.sqrt(r / -c))
    return a


def solve_s(c: float, r: float) -> np.longdouble:
    """Largest real root of ``s**3 - c*s**2 - r = 0``.

    The root is returned in extended precision: a float64 root can leave a
    residual far above ``1e-9 * r`` when ``c**3 >> r`` (the slope there is
    about ``c**2`` while float64 spacing near ``c`` is ``c * 2**-52``).

    For ``r > 0`` this is the unique root on ``(max(c, 0), inf)``; for
    ``r == 0`` the result is ``max(c, 0)``.

    Raises
    ------
    InputError
        If ``r`` is negative or either input is not finite.
    """
    c = float(c)
    r = float(r)
    if not (math.isfinite(c) and math.isfinite(r)):
        raise InputError(f"cubic coefficients must be finite, got c={c}, r={r}")
    if r < 0.0:
        raise InputError(f"cubic right-hand side must be >= 0, got {r}")
    lower = max(c, 0.0)
    if r == 0.0:
        return np.longdouble(lower)

    upper = _upper_bracket(c, r)
    try:
        s0 = _cardano_largest(c, r)
    except (OverflowError, ZeroDivisionError):
        s0 = upper
    # the closed form cancels badly when |c|**3 >> r; fall back to the
    # bracket, from which Newton descends monotonically (f convex there)
    if not lower < s0 <= upper:
        s0 = upper
    s = np.longdouble(s0)
    cl, rl = np.longdouble(c), np.longdouble(r)
    tiny = np.finfo(np.longdouble).eps
    for k in range(_MAX_NEWTON):
        f = s * s * (s - cl) - rl
        df = s * (3 * s - 2 * cl)
        if not df > 0:
            break
        step = f / df
        s_next = s - step
        if not s_next > lower:
            break
        s = s_next
        if k + 1 >= _NEWTON_STEPS and abs(step) <= 4 * tiny * s:
            break
    if not s > lower:
        s = np.nextafter(np.longdouble(lower), np.longdouble(np.inf))
    return s
