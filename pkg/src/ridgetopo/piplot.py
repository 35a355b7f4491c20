"""The Pi-function of a component pair and the mode-count bands it induces.

For a pair (i, j) the ridgeline runs from mu_i (t = 0) to mu_j (t = 1).
``Pi(t)`` is the weight on component j, within the pair, for which x*(t) is
a critical point of the pair mixture.  It follows from the posterior identity
``t = Pi phi_j / ((1 - Pi) phi_i + Pi phi_j)``:

    1 / Pi(t) = 1 + (1 - t) phi_j(t) / (t phi_i(t))

so Pi(0) = 0 and Pi(1) = 1.  The equation ``Pi(t) = pi`` has one solution
per critical point; rising crossings are modes, falling ones saddles (or
antimodes when D = 1).

Component indices are 0-based here; the CLI and JSON files use 1-based labels.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logit

from . import curvature
from .errors import CoincidentMeans, InternalInconsistency
from .model import Mixture
from .ridgeline import CriticalKind, CriticalPoint, classify_critical, pair_curve
from .roots import bisect, composite_grid, sign_change_brackets

SEARCH_LO = 1e-14
SEARCH_HI = 1.0 - 1e-14
TAIL_MARGIN = 40.0  # log-odds units past the asymptote
TAIL_FLOOR = -700.0  # keeps expit(s) a normal float


def _curve(m: Mixture, i: int, j: int):
    curve = pair_curve(m, i, j)
    if curve.coincident:
        raise CoincidentMeans(f"components {i + 1} and {j + 1} share a mean")
    return curve


def pi_log_odds(m: Mixture, i: int, j: int, t) -> np.ndarray:
    """log(Pi / (1 - Pi)) = logit(t) + log phi_i(t) - log phi_j(t), for t in (0, 1)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lp = _curve(m, i, j).log_phi(t)
    with np.errstate(divide="ignore"):
        return np.log(t) - np.log1p(-t) + lp[:, 0] - lp[:, 1]


def pi_of_alpha(m: Mixture, i: int, j: int, alpha):
    """Pi(alpha) with the endpoint conventions Pi(0) = 0 and Pi(1) = 1."""
    scalar = np.ndim(alpha) == 0
    t = np.atleast_1d(np.asarray(alpha, dtype=float))
    if np.any((t < 0) | (t > 1)):
        raise ValueError("alpha must lie in [0, 1]")
    out = np.empty_like(t)
    inner = (t > 0) & (t < 1)
    out[t == 0] = 0.0
    out[t == 1] = 1.0
    if inner.any():
        out[inner] = expit(pi_log_odds(m, i, j, t[inner]))
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class PiCurve:
    alpha: np.ndarray
    pi: np.ndarray


def pi_curve(m: Mixture, i: int, j: int, n_samples: int = 4096) -> PiCurve:
    ts = composite_grid(n_samples)
    return PiCurve(ts, pi_of_alpha(m, i, j, ts))


class Direction(str, enum.Enum):
    RISING = "rising"
    FALLING = "falling"


@dataclass(frozen=True)
class PiCrossing:
    alpha: float
    direction: Direction


def _tail_crossing(m: Mixture, i: int, j: int, target: float) -> float | None:
    """The crossing with t below SEARCH_LO, searched in s = logit(t).

    For tiny t the log-odds is s plus a nearly constant offset, so it is
    increasing there and holds at most one (rising) crossing.  Returns t.
    """
    curve = _curve(m, i, j)
    c0 = float(np.diff(curve.log_phi(0.0)[0])[0]) * -1.0  # log phi_i - log phi_j at mu_i
    s_hi = float(logit(SEARCH_LO))
    s_lo = max(min(s_hi - 1.0, target - c0 - TAIL_MARGIN), TAIL_FLOOR)

    def g(s):
        return float(pi_log_odds(m, i, j, expit(s))[0]) - target

    ga, gb = g(s_lo), g(s_hi)
    if not (ga < 0.0 < gb):
        return None
    return float(expit(bisect(g, s_lo, s_hi, ga, gb)))


def solve_pi_equation(m: Mixture, i: int, j: int, pi: float) -> list[PiCrossing]:
    """All solutions of Pi(alpha) = pi in (0, 1), sorted.

    Inside (1e-14, 1 - 1e-14) the search grid is the composite
    uniform-plus-ladder grid with the zeroes of the curvature function added
    as nodes.  Pi is monotone between those zeroes, so every crossing sits in
    exactly one sign-change bracket.  Beyond that window each end can hold one
    more rising crossing, which is found in logit space; widely separated
    components put their modes there.  Near alpha = 1 the returned value may
    round to 1.0.
    """
    if not 0.0 < pi < 1.0:
        raise ValueError("pi must lie strictly between 0 and 1")
    target = float(logit(pi))
    extra = curvature.q_zeroes(m, i, j) + curvature.q_touches(m, i, j)
    grid = composite_grid(lo=SEARCH_LO, hi=SEARCH_HI, extra=extra)
    vals = pi_log_odds(m, i, j, grid) - target

    def f(t):
        return float(pi_log_odds(m, i, j, t)[0]) - target

    brackets, _ = sign_change_brackets(grid, vals, zero_tol=0.0)
    out = []
    low = _tail_crossing(m, i, j, target)
    if low is not None:
        out.append(PiCrossing(low, Direction.RISING))
    for a, b, fa, fb in brackets:
        root = bisect(f, a, b, fa, fb)
        out.append(PiCrossing(root, Direction.RISING if fb > fa else Direction.FALLING))
    high = _tail_crossing(m, j, i, -target)
    if high is not None:
        out.append(PiCrossing(1.0 - high, Direction.RISING))
    return out


def pair_mixture(m: Mixture, i: int, j: int, pi: float) -> Mixture:
    """Components i and j with weights (1 - pi, pi)."""
    return m.submixture([i, j], weights=[1.0 - pi, pi])


def critical_points_for_pi(m: Mixture, i: int, j: int, pi: float) -> list[CriticalPoint]:
    """Critical points of the pair mixture with weight ``pi`` on component j.

    The crossing direction predicts the kind; the Hessian count must agree.
    """
    sub = pair_mixture(m, i, j, pi)
    out = []
    for c in solve_pi_equation(m, i, j, pi):
        cp = classify_critical(sub, c.alpha)
        if c.direction is Direction.RISING:
            expected = CriticalKind.MODE
        else:
            expected = CriticalKind.SADDLE if m.dim > 1 else CriticalKind.LOCAL_MIN
        if cp.kind is not expected and not cp.degenerate:
            raise InternalInconsistency(
                f"{c.direction.value} crossing at alpha={c.alpha!r} classified as {cp.kind.value}"
            )
        out.append(cp)
    return out


def mode_count(m: Mixture, i: int, j: int, pi: float) -> int:
    if pair_curve(m, i, j).coincident:
        return 1
    return sum(c.direction is Direction.RISING for c in solve_pi_equation(m, i, j, pi))


@dataclass(frozen=True)
class Band:
    lo: float
    hi: float
    modes: int


@dataclass(frozen=True)
class ModalityBands:
    pair: tuple[int, int]
    breakpoints: list[float]
    bands: list[Band]
    zero_alphas: list[float] = field(default_factory=list)

    def count_at(self, pi: float) -> int:
        for b in self.bands:
            if b.lo < pi < b.hi:
                return b.modes
        raise ValueError(f"pi={pi!r} lies on a breakpoint or outside (0, 1)")

    def region(self, min_modes: int) -> tuple[float, float] | None:
        """Smallest interval containing every band with at least ``min_modes`` modes."""
        hit = [b for b in self.bands if b.modes >= min_modes]
        return (hit[0].lo, hit[-1].hi) if hit else None

    def to_dict(self) -> dict:
        return {
            "pair": [self.pair[0] + 1, self.pair[1] + 1],
            "breakpoints": list(self.breakpoints),
            "bands": [{"lo": b.lo, "hi": b.hi, "modes": b.modes} for b in self.bands],
            "zero_alphas": list(self.zero_alphas),
        }


def modality_bands(m: Mixture, i: int, j: int) -> ModalityBands:
    """Partition of (0, 1) in pi into intervals of constant mode count."""
    if pair_curve(m, i, j).coincident:
        return ModalityBands((i, j), [], [Band(0.0, 1.0, 1)], [])
    zeros = curvature.q_zeroes(m, i, j)
    breaks = sorted(set(float(v) for v in pi_of_alpha(m, i, j, np.array(zeros, dtype=float))))
    edges = [0.0] + breaks + [1.0]
    bands: list[Band] = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        n = mode_count(m, i, j, 0.5 * (lo + hi))
        if bands and bands[-1].modes == n:
            bands[-1] = Band(bands[-1].lo, hi, n)
        else:
            bands.append(Band(lo, hi, n))
    return ModalityBands((i, j), breaks, bands, list(zeros))
