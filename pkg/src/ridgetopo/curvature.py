"""Curvature function of a component pair and its closed-form special cases.

kappa(t) = p(t)^2 q(t) with q(t) = 1 - t(1 - t) p(t), so the sign changes of
kappa (the turning points of Pi) are the sign changes of q.  For equal
covariances q is a quadratic; for proportional covariances
``Sigma_j = sigma2 Sigma_i`` its zeroes are those of the cubic

    q1(t) = (sigma2 (1 - t) + t)^3 - t (1 - t) mu2 sigma2

with mu2 the Mahalanobis separation under Sigma_i.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .model import Mixture
from .ridgeline import pair_curve
from .roots import bisect, composite_grid, sign_change_brackets

PROPORTIONAL_RTOL = 1e-10
TOUCH_TOL = 1e-10


@dataclass(frozen=True)
class CurvatureEval:
    alpha: float
    p: float
    q: float
    kappa: float


def curvature_arrays(m: Mixture, i: int, j: int, ts) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised (p, q, kappa) along the pair ridgeline."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    p = pair_curve(m, i, j).p(ts)
    q = 1.0 - ts * (1.0 - ts) * p
    return p, q, p * p * q


def curvature_eval(m: Mixture, i: int, j: int, alpha: float) -> CurvatureEval:
    p, q, k = curvature_arrays(m, i, j, [alpha])
    return CurvatureEval(float(alpha), float(p[0]), float(q[0]), float(k[0]))


def _q(m, i, j):
    curve = pair_curve(m, i, j)

    def f(t):
        t = np.atleast_1d(t)
        return 1.0 - t * (1.0 - t) * curve.p(t)

    return f


def _scan(m: Mixture, i: int, j: int):
    """Sign-change roots and touching zeroes of q on the composite grid.

    Grid-local minima of q that stay positive on the grid are minimised
    continuously; a minimum below zero reveals a narrow dip (two roots the
    grid stepped over) and one within TOUCH_TOL of zero is a tangency.
    """
    if pair_curve(m, i, j).coincident:
        return [], []
    q = _q(m, i, j)
    grid = composite_grid()
    vals = q(grid)
    roots, touches = [], []
    brackets, flat = sign_change_brackets(grid, vals)
    for a, b, fa, fb in brackets:
        roots.append(bisect(lambda t: float(q(t)[0]), a, b, fa, fb))
    for lo, hi in flat:
        touches.append(0.5 * (lo + hi))
    inner = np.flatnonzero((vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:]) & (vals[1:-1] > 0)) + 1
    for n in inner:
        lo, hi = grid[n - 1], grid[n + 1]
        res = minimize_scalar(lambda t: float(q(t)[0]), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        if res.fun < -TOUCH_TOL:
            fl, fr = float(vals[n - 1]), float(vals[n + 1])
            roots.append(bisect(lambda t: float(q(t)[0]), lo, res.x, fl, res.fun))
            roots.append(bisect(lambda t: float(q(t)[0]), res.x, hi, res.fun, fr))
        elif res.fun <= TOUCH_TOL:
            touches.append(float(res.x))
    return sorted(roots), sorted(touches)


def q_zeroes(m: Mixture, i: int, j: int) -> list[float]:
    """Sign-change zeroes of q in (0, 1); there is always an even number of them."""
    return _scan(m, i, j)[0]


def q_touches(m: Mixture, i: int, j: int) -> list[float]:
    """Zeroes where q touches 0 without changing sign (degenerate, no band split)."""
    return _scan(m, i, j)[1]


# --------------------------------------------------------------------------
# closed forms


class Case(str, enum.Enum):
    EQUAL = "EqualVariance"
    PROPORTIONAL = "ProportionalVariance"
    GENERAL = "General"


def rf_bound(sigma2: float) -> float:
    """Separation threshold mu0^2 below which a proportional-variance pair is unimodal for every pi."""
    s2 = sigma2
    return (2.0 * (1.0 - s2 + s2 * s2) ** 1.5 - (2 * s2**3 - 3 * s2**2 - 3 * s2 + 2)) / s2


def discriminant(mu2: float, sigma2: float) -> float:
    """s(mu): nonnegative exactly when the cubic q1 has three real zeroes."""
    s2 = sigma2
    return mu2 * mu2 * s2 + 2 * mu2 * (s2 - 2) * (s2 + 1) * (2 * s2 - 1) - 27 * s2 * (s2 - 1) ** 2


def q1_coefficients(mu2: float, sigma2: float) -> tuple[float, float, float, float]:
    """(c3, c2, c1, c0) of q1 expanded in powers of t."""
    c, a = sigma2, 1.0 - sigma2
    return a**3, 3 * c * a * a + c * mu2, 3 * c * c * a - c * mu2, c**3


def q1(t, mu2: float, sigma2: float):
    t = np.asarray(t, dtype=float)
    return (sigma2 * (1 - t) + t) ** 3 - t * (1 - t) * mu2 * sigma2


def _polish(coefs, r: float) -> float:
    c3, c2, c1, c0 = coefs
    for _ in range(50):
        f = ((c3 * r + c2) * r + c1) * r + c0
        df = (3 * c3 * r + 2 * c2) * r + c1
        if df == 0.0:
            break
        step = f / df
        r -= step
        if abs(step) <= 1e-14 * max(1.0, abs(r)):
            break
    return r


def cubic_real_roots(c3: float, c2: float, c1: float, c0: float) -> list[float]:
    """Real roots of c3 t^3 + c2 t^2 + c1 t + c0 (trigonometric / Cardano, Newton-polished)."""
    coefs = (c3, c2, c1, c0)
    big = max(abs(c2), abs(c1), abs(c0))
    if abs(c3) <= 1e-12 * big:
        if c2 == 0.0:
            return [] if c1 == 0.0 else [-c0 / c1]
        disc = c1 * c1 - 4 * c2 * c0
        if disc < 0:
            return []
        sq = math.sqrt(disc)
        # stable quadratic formula
        qq = -0.5 * (c1 + math.copysign(sq, c1))
        roots = [qq / c2] + ([c0 / qq] if qq != 0.0 else [])
        return sorted(_polish(coefs, r) for r in roots)
    b, c, d = c2 / c3, c1 / c3, c0 / c3
    p = c - b * b / 3.0
    q = 2 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc < 0:
        rad = 2.0 * math.sqrt(-p / 3.0)
        phi = math.acos(max(-1.0, min(1.0, 3.0 * q / (p * rad))))
        roots = [rad * math.cos((phi - 2.0 * math.pi * k) / 3.0) + shift for k in range(3)]
    else:
        sq = math.sqrt(disc)
        roots = [float(np.cbrt(-q / 2.0 + sq) + np.cbrt(-q / 2.0 - sq)) + shift]
    # the largest root is accurate; deflate it (from the constant end) and
    # solve the remaining quadratic, which keeps small roots exact when c3 is tiny
    big_root = _polish(coefs, max(roots, key=abs))
    if big_root == 0.0:
        rest = cubic_real_roots(0.0, c3, c2, c1)
    else:
        cc = -c0 / big_root
        rest = cubic_real_roots(0.0, c3, (cc - c1) / big_root, cc)
    roots = [big_root] + rest
    return sorted(_polish(coefs, r) for r in roots)


@dataclass(frozen=True)
class SpecialCaseReport:
    case: Case
    sigma2: float
    mahalanobis2: float
    unimodal_for_all_pi: bool
    root_alphas: list[float]
    pi_interval: tuple[float, float] | None
    rf_bound: float
    discriminant: float
    routes_agree: bool

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "sigma2": self.sigma2,
            "mahalanobis2": self.mahalanobis2,
            "unimodal_for_all_pi": self.unimodal_for_all_pi,
            "root_alphas": list(self.root_alphas),
            "pi_interval": list(self.pi_interval) if self.pi_interval else None,
            "rf_bound": self.rf_bound,
            "discriminant": self.discriminant,
            "routes_agree": self.routes_agree,
        }


def proportionality(m: Mixture, i: int, j: int) -> float | None:
    """sigma2 with Sigma_j = sigma2 Sigma_i, or None if the pair is not proportional."""
    si, sj = m.components[i].cov, m.components[j].cov
    s2 = float(np.trace(sj) / np.trace(si))
    dev = np.linalg.norm(sj - s2 * si) / np.linalg.norm(sj)
    return s2 if dev <= PROPORTIONAL_RTOL else None


def special_case_analysis(m: Mixture, i: int, j: int) -> SpecialCaseReport:
    """Closed-form modality analysis for equal or proportional covariances.

    The cubic's roots and the discriminant threshold are computed
    independently; ``routes_agree`` records whether they tell the same story.
    General pairs fall back on the numerical zeroes of q.
    """
    from .piplot import pi_of_alpha

    ci = m.components[i]
    delta = m.components[j].mean - ci.mean
    mu2 = float(delta @ ci.prec @ delta)
    s2 = proportionality(m, i, j)

    if s2 is None:
        roots = q_zeroes(m, i, j)
        interval = None
        if len(roots) == 2:
            lo, hi = sorted(pi_of_alpha(m, i, j, np.array(roots)))
            interval = (float(lo), float(hi))
        return SpecialCaseReport(Case.GENERAL, float("nan"), mu2, not roots, roots, interval,
                                 float("nan"), float("nan"), True)

    case = Case.EQUAL if abs(s2 - 1.0) <= PROPORTIONAL_RTOL else Case.PROPORTIONAL
    if case is Case.EQUAL:
        s2 = 1.0
    bound = rf_bound(s2)
    disc = discriminant(mu2, s2)
    cands = cubic_real_roots(*q1_coefficients(mu2, s2))
    roots = [r for r in cands if 0.0 < r < 1.0]
    if len(roots) == 2 and abs(roots[1] - roots[0]) <= 1e-9:
        roots = []  # double root: q touches zero
    unimodal = not roots
    interval = None
    if roots:
        lo, hi = sorted(pi_of_alpha(m, i, j, np.array(roots)))
        interval = (float(lo), float(hi))
    agree = unimodal == (mu2 <= bound) == (disc <= 0.0)
    return SpecialCaseReport(case, s2, mu2, unimodal, roots, interval, bound, disc, agree)
