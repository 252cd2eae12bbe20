from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compactseg.cubic import solve_s
from compactseg.errors import InputError


def exact(x):
    return Fraction(*x.as_integer_ratio())


def residual(s, c, r):
    s, c, r = exact(s), Fraction(c), Fraction(r)
    return abs(s**3 - c * s**2 - r)


def test_examples():
    assert solve_s(0.0, 8.0) == 2
    assert solve_s(2.0, 9.0) == 3
    # reference from bisection on s^3 + s^2 - 4 over [1, 2]
    lo, hi = Fraction(1), Fraction(2)
    for _ in range(80):
        mid = (lo + hi) / 2
        if mid**3 + mid**2 - 4 < 0:
            lo = mid
        else:
            hi = mid
    assert float(solve_s(-1.0, 4.0)) == pytest.approx(float(lo), rel=1e-15)
    assert float(solve_s(-1.0, 4.0)) == pytest.approx(1.3146, abs=1e-4)


def test_zero_r():
    assert solve_s(3.0, 0.0) == 3.0
    assert solve_s(-3.0, 0.0) == 0.0


def test_invalid_inputs():
    with pytest.raises(InputError):
        solve_s(1.0, -1.0)
    with pytest.raises(InputError):
        solve_s(np.nan, 1.0)
    with pytest.raises(InputError):
        solve_s(1.0, np.inf)


def neighbours_bracket(s, c, r):
    """True when f changes sign across the long-double neighbours of s."""
    f = lambda t: t**3 - Fraction(c) * t**2 - Fraction(r)  # noqa: E731
    below = np.nextafter(s, np.longdouble(-np.inf))
    above = np.nextafter(s, np.longdouble(np.inf))
    return f(exact(below)) <= 0 <= f(exact(above))


def accurate(s, c, r):
    # Near c >> 1 with small r, |f'(s)| * spacing(s) exceeds the bound for
    # every representable s; the best possible answer is then a bracketing root.
    return residual(s, c, r) <= Fraction(1e-9) * max(1, Fraction(r)) or neighbours_bracket(s, c, r)


@pytest.mark.parametrize(
    "c, r",
    [(-1e6, 1e-6), (1e6, 1e-6), (0.0, 1e-300), (1e6, 1e12), (-1e6, 1e12), (1e-3, 1e-12), (5.0, 1e-30)],
)
def test_extreme_cases(c, r):
    s = solve_s(c, r)
    assert s > max(c, 0.0)
    assert accurate(s, c, r)


@settings(max_examples=300, deadline=None)
@given(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False),
    st.floats(min_value=1e-12, max_value=1e12, allow_nan=False),
)
def test_residual_and_bracket(c, r):
    s = solve_s(c, r)
    assert s > max(c, 0.0)
    assert accurate(s, c, r)
    # unique root on (max(c, 0), inf): sign change around s
    lo = Fraction(max(c, 0.0))
    f = lambda t: t**3 - Fraction(c) * t**2 - Fraction(r)  # noqa: E731
    assert f(lo) < 0
    delta = max(abs(exact(s)) * Fraction(1, 10**12), Fraction(1, 10**300))
    assert f(exact(s) + delta) > 0


@pytest.mark.parametrize("c", [-50.0, -1.0, 0.0, 0.5, 40.0])
def test_monotone_in_r(c):
    rs = np.logspace(-8, 8, 200)
    roots = [solve_s(c, r) for r in rs]
    assert all(a <= b for a, b in zip(roots, roots[1:]))
