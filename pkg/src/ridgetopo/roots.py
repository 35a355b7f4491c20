"""Composite search grids on [0, 1] and sign-change root bracketing.

Uniform grids miss features that live within 1e-3 of an endpoint, so every
grid here is the union of a uniform grid and two geometric ladders that
halve their distance to 0 and to 1 from 1e-1 down to 1e-12.
"""

from __future__ import annotations

import numpy as np

N_UNIFORM = 4097  # 4096 intervals; keeps 0.5 on the grid
LADDER_TOP = 1e-1
LADDER_BOTTOM = 1e-12
LADDER_RATIO = 0.5
ZERO_TOL = 1e-14


def ladder(top: float = LADDER_TOP, bottom: float = LADDER_BOTTOM, ratio: float = LADDER_RATIO):
    n = int(np.floor(np.log(bottom / top) / np.log(ratio))) + 1
    pts = top * ratio ** np.arange(n)
    return np.append(pts, bottom) if pts[-1] > bottom else pts


def composite_grid(n_uniform: int = N_UNIFORM, lo: float = 0.0, hi: float = 1.0, extra=()) -> np.ndarray:
    """Sorted unique union of a uniform grid, both endpoint ladders and ``extra`` nodes, clipped to [lo, hi]."""
    lad = ladder()
    pts = np.concatenate(
        [np.linspace(0.0, 1.0, n_uniform), lad, 1.0 - lad, np.asarray(extra, dtype=float), [lo, hi]]
    )
    pts = pts[(pts >= lo) & (pts <= hi)]
    return np.unique(pts)


def bisect(f, a: float, b: float, fa: float | None = None, fb: float | None = None,
           xtol: float = 1e-12, maxiter: int = 400) -> float:
    """Root of ``f`` in a sign-change bracket [a, b].

    Bisection continues past ``xtol`` until the bracket is also below four
    ulps of its location, so roots sitting at 1e-5 keep full relative
    precision.  Stops early on an exact zero.
    """
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise ValueError(f"no sign change on [{a!r}, {b!r}]")
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        if not (a < m < b):
            break
        width = b - a
        if width <= xtol and width <= 4 * np.spacing(max(abs(a), abs(b))):
            break
        fm = f(m)
        if fm == 0.0:
            return m
        if np.sign(fm) == np.sign(fa):
            a, fa = m, fm
        else:
            b, fb = m, fm
    # return the end with the smaller residual
    return a if abs(fa) <= abs(fb) else b


def sign_change_brackets(grid: np.ndarray, values: np.ndarray, zero_tol: float = ZERO_TOL):
    """Brackets ``(a, b, fa, fb)`` around every sign change of ``values`` on ``grid``.

    Values with magnitude below ``zero_tol`` are treated as zero; a run of
    zeros flanked by opposite signs yields one bracket spanning the run, and
    one flanked by equal signs is a touching (non-crossing) zero.  Returns
    ``(brackets, touches)`` where ``touches`` lists (lo, hi) spans.
    """
    signs = np.where(np.abs(values) <= zero_tol, 0, np.sign(values)).astype(int)
    brackets, touches = [], []
    nz = np.flatnonzero(signs)
    for a_idx, b_idx in zip(nz[:-1], nz[1:]):
        if signs[a_idx] != signs[b_idx]:
            brackets.append((grid[a_idx], grid[b_idx], values[a_idx], values[b_idx]))
        elif b_idx - a_idx > 1:
            touches.append((grid[a_idx], grid[b_idx]))
    return brackets, touches
