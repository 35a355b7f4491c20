import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from ridgetopo import quadrature, roots


def test_ladder_reaches_bottom():
    lad = roots.ladder()
    assert lad[0] == 0.1 and lad[-1] == 1e-12
    assert np.all(np.diff(lad) < 0)


def test_composite_grid_contents():
    g = roots.composite_grid()
    assert g[0] == 0.0 and g[-1] == 1.0 and 0.5 in g
    assert np.all(np.diff(g) > 0)
    assert 1e-12 in g and 1 - 1e-12 in g
    assert roots.composite_grid(extra=[0.123456789]).size == g.size + 1


def test_composite_grid_clipped():
    g = roots.composite_grid(65, lo=0.25, hi=0.75)
    assert g[0] == 0.25 and g[-1] == 0.75


@given(st.floats(1e-9, 1 - 1e-9))
def test_bisect_matches_brentq(r):
    f = lambda t: np.tanh(40 * (t - r))  # noqa: E731
    assert roots.bisect(f, 0.0, 1.0) == pytest.approx(brentq(f, 0.0, 1.0, xtol=1e-15), abs=1e-12)


def test_bisect_keeps_relative_precision_near_zero():
    r = 3.7e-9
    assert roots.bisect(lambda t: t - r, 0.0, 1.0) == pytest.approx(r, rel=1e-12)


def test_bisect_rejects_bad_bracket():
    with pytest.raises(ValueError):
        roots.bisect(lambda t: t * t + 1, -1.0, 1.0)


def test_sign_change_brackets_and_touches():
    grid = np.arange(11.0)
    vals = np.array([1, 1, -1, -1, 0, 0, -1, 0, 1, 1, 1], dtype=float)
    brackets, touches = roots.sign_change_brackets(grid, vals)
    assert [(a, b) for a, b, *_ in brackets] == [(1, 2), (6, 8)]
    assert touches == [(3, 6)]


@pytest.mark.parametrize("f, a, b", [
    (np.sin, 0.0, np.pi),
    (lambda x: np.exp(-x * x), -3.0, 2.0),
    (lambda x: np.sqrt(np.abs(x)), -1.0, 1.0),
    (lambda x: 1.0 / (1e-4 + x * x), -1.0, 1.0),
])
def test_adaptive_simpson_matches_quad(f, a, b):
    ref, _ = quad(f, a, b, epsabs=1e-12, limit=500, points=[0.0] if a < 0 < b else None)
    assert quadrature.adaptive_simpson(f, a, b, tol=1e-8) == pytest.approx(ref, abs=1e-8)


def test_adaptive_simpson_orientation():
    assert quadrature.adaptive_simpson(np.cos, 1.0, 0.0) == pytest.approx(-np.sin(1.0), abs=1e-10)
    assert quadrature.adaptive_simpson(np.cos, 0.5, 0.5) == 0.0


@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=8, unique=True))
def test_pieces_sum_to_the_whole(cuts):
    edges = np.sort(cuts)
    f = lambda x: np.exp(np.sin(5 * x))  # noqa: E731
    pieces = quadrature.integrate_intervals(f, edges, tol=1e-10)
    whole = quadrature.adaptive_simpson(f, edges[0], edges[-1], tol=1e-10)
    assert pieces.sum() == pytest.approx(whole, abs=1e-9)
