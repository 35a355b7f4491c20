"""Adaptive Simpson quadrature, vectorised over many subintervals at once."""

from __future__ import annotations

import numpy as np

MAX_DEPTH = 50


def _simpson(fa, fm, fb, h):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def integrate_intervals(f, edges, tol: float = 1e-8) -> np.ndarray:
    """Integral of ``f`` over each consecutive pair of ``edges``.

    ``f`` must accept and return 1-D arrays.  The tolerance is absolute for
    the sum of all pieces; it is shared among intervals in proportion to
    their width, the classic adaptive Simpson bookkeeping.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    total_width = float(edges[-1] - edges[0])
    out = np.zeros(a.size)
    if a.size == 0 or total_width == 0.0:
        return out
    owner = np.arange(a.size)
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = _simpson(fa, fm, fb, b - a)
    tols = tol * (b - a) / total_width
    for depth in range(MAX_DEPTH + 1):
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(np.concatenate([lm, rm])).reshape(2, -1)
        left = _simpson(fa, flm, fm, m - a)
        right = _simpson(fm, frm, fb, b - m)
        err = left + right - whole
        done = (np.abs(err) <= 15.0 * tols) | (depth == MAX_DEPTH) | (b - a <= 1e-15)
        np.add.at(out, owner[done], (left + right + err / 15.0)[done])
        keep = ~done
        if not keep.any():
            break
        # split every unfinished interval in two
        owner = np.concatenate([owner[keep], owner[keep]])
        na = np.concatenate([a[keep], m[keep]])
        nb = np.concatenate([m[keep], b[keep]])
        nm = np.concatenate([lm[keep], rm[keep]])
        nfa = np.concatenate([fa[keep], fm[keep]])
        nfm = np.concatenate([flm[keep], frm[keep]])
        nfb = np.concatenate([fm[keep], fb[keep]])
        whole = np.concatenate([left[keep], right[keep]])
        tols = np.concatenate([tols[keep], tols[keep]]) / 2.0
        a, b, m, fa, fm, fb = na, nb, nm, nfa, nfm, nfb
    return out


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-8) -> float:
    """Integral of a vectorised ``f`` over [a, b] to absolute tolerance ``tol``."""
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    return sign * float(integrate_intervals(f, [a, b], tol)[0])
