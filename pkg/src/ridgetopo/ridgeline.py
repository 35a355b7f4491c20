"""The ridgeline map from the unit simplex into data space, and what lives on it.

``x*(alpha)`` solves ``S_alpha x = sum_j alpha_j P_j mu_j`` with
``S_alpha = sum_j alpha_j P_j`` and ``P_j`` the component precisions.  Every
critical point of the mixture density lies in its image, and the mixture
weights never enter the map.

For two components a scalar ``t`` stands for the simplex point ``(1 - t, t)``,
so ``t = 0`` is the first mean and ``t = 1`` the second.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import cho_factor, cho_solve, null_space

from . import model
from .errors import (
    DegenerateFrame,
    InternalInconsistency,
    NotCritical,
    NotThreeComponents,
    NotTwoComponents,
)
from .model import Mixture, check_simplex
from .quadrature import integrate_intervals
from .roots import composite_grid

CRITICAL_GRAD_TOL = 1e-6
DEGENERATE_EIG_RTOL = 1e-9
TIE_TOL = 1e-12  # log-elevation differences below this count as ties
SAME_POINT_TOL = 1e-9  # data-space distance, in units of the mixture length scale


def as_alpha(m: Mixture, alpha) -> np.ndarray:
    """Full simplex coordinates; a scalar is accepted for K = 2."""
    a = np.asarray(alpha, dtype=float)
    if a.ndim == 0:
        if m.k != 2:
            raise NotTwoComponents("a scalar alpha needs a two-component mixture")
        a = np.array([1.0 - float(a), float(a)])
    return check_simplex(a, m.k)


def ridgeline_point(m: Mixture, alpha) -> np.ndarray:
    """x*(alpha), via a Cholesky solve of the SPD system; independent of the weights."""
    a = as_alpha(m, alpha)
    s = np.einsum("k,kde->de", a, m.precs)
    rhs = a @ m.prec_means
    return cho_solve(cho_factor(s, lower=True), rhs)


def ridgeline_points(m: Mixture, alphas) -> np.ndarray:
    """Batched x*(alpha) for an (N, K) array of simplex points."""
    a = np.atleast_2d(np.asarray(alphas, dtype=float))
    s = np.einsum("nk,kde->nde", a, m.precs)
    rhs = a @ m.prec_means
    return np.linalg.solve(s, rhs[:, :, None])[:, :, 0]


@dataclass(frozen=True)
class RidgelineEval:
    alpha: np.ndarray
    x: np.ndarray
    elevation: float
    log_elevation: float


def elevation(m: Mixture, alpha) -> RidgelineEval:
    a = as_alpha(m, alpha)
    x = ridgeline_point(m, a)
    lg = model.log_density(m, x)
    return RidgelineEval(a, x, math.exp(lg), lg)


def log_elevations(m: Mixture, alphas) -> np.ndarray:
    return model.log_density(m, ridgeline_points(m, alphas))


@dataclass(frozen=True)
class TangentFrame:
    s_alpha: np.ndarray
    v: np.ndarray  # (K, D) rows v_j = P_j (x* - mu_j)
    d: np.ndarray  # (K-1, D) rows d_j = S^-1 (v_j - v_K)
    w_basis: np.ndarray  # (D-K+1, D) rows spanning W


def tangent_frame(m: Mixture, alpha) -> TangentFrame:
    """Surface directions d_j and the S-orthogonal complement W at x*(alpha).

    ``w_basis`` is empty at boundary points of the simplex or when D < K - 1.
    """
    a = as_alpha(m, alpha)
    s = np.einsum("k,kde->de", a, m.precs)
    cf = cho_factor(s, lower=True)
    x = cho_solve(cf, a @ m.prec_means)
    v = np.einsum("kde,ke->kd", m.precs, x - m.means)
    d = cho_solve(cf, (v[:-1] - v[-1]).T).T
    scale = max(np.max(np.abs(m.means)), 1.0)
    if np.all(np.abs(d) <= 1e-14 * scale):
        raise DegenerateFrame("all surface directions vanish; the means coincide")
    if np.all(a > 0) and m.dim >= m.k - 1:
        w = null_space(d @ s).T
    else:
        w = np.zeros((0, m.dim))
    return TangentFrame(s, v, d, w)


# --------------------------------------------------------------------------
# two-component ridgeline


class PairCurve:
    """Vectorised ridgeline quantities for components ``i`` (t = 0) and ``j`` (t = 1)."""

    def __init__(self, m: Mixture, i: int, j: int):
        if i == j:
            raise ValueError("a pair needs two distinct components")
        self.i, self.j = i, j
        ci, cj = m.components[i], m.components[j]
        self.dim = m.dim
        self.mu_i, self.mu_j = ci.mean, cj.mean
        self.p_i, self.p_j = ci.prec, cj.prec
        self.pm_i, self.pm_j = m.prec_means[i], m.prec_means[j]
        self.log_norm = np.array([m.log_norms[i], m.log_norms[j]])
        self.delta = self.mu_j - self.mu_i
        self.coincident = bool(np.array_equal(self.mu_i, self.mu_j))

    def _system(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        s = (1.0 - t)[:, None, None] * self.p_i + t[:, None, None] * self.p_j
        rhs = (1.0 - t)[:, None] * self.pm_i + t[:, None] * self.pm_j
        return t, s, rhs

    def x(self, t) -> np.ndarray:
        _, s, rhs = self._system(t)
        return np.linalg.solve(s, rhs[:, :, None])[:, :, 0]

    def _x_and_v(self, t):
        t, s, rhs = self._system(t)
        x = np.linalg.solve(s, rhs[:, :, None])[:, :, 0]
        vi = (x - self.mu_i) @ self.p_i
        vj = (x - self.mu_j) @ self.p_j
        return t, s, x, vi, vj

    def log_phi(self, t) -> np.ndarray:
        """(N, 2) log densities of components i and j at x*(t)."""
        _, _, x, vi, vj = self._x_and_v(t)
        qi = np.einsum("nd,nd->n", x - self.mu_i, vi)
        qj = np.einsum("nd,nd->n", x - self.mu_j, vj)
        return np.stack([self.log_norm[0] - 0.5 * qi, self.log_norm[1] - 0.5 * qj], axis=1)

    def velocity(self, t) -> np.ndarray:
        """dx*/dt from S_t xdot = v_i - v_j."""
        _, s, _, vi, vj = self._x_and_v(t)
        return np.linalg.solve(s, (vi - vj)[:, :, None])[:, :, 0]

    def speed(self, t) -> np.ndarray:
        return np.linalg.norm(self.velocity(t), axis=1)

    def p(self, t) -> np.ndarray:
        """Quadratic form Delta' A' S^-1 A Delta with A = P_i S^-1 P_j."""
        _, s, _ = self._system(t)
        b = np.broadcast_to(self.p_i @ self.delta, (s.shape[0], self.dim))
        y = np.linalg.solve(s, b[:, :, None])[:, :, 0]
        z = y @ self.p_j.T
        w = np.linalg.solve(s, z[:, :, None])[:, :, 0]
        return np.maximum(np.einsum("nd,nd->n", z, w), 0.0)


@lru_cache(maxsize=64)
def pair_curve(m: Mixture, i: int, j: int) -> PairCurve:
    return PairCurve(m, i, j)


def _require_two(m: Mixture):
    if m.k != 2:
        raise NotTwoComponents(f"operation needs K = 2, mixture has K = {m.k}")


def arclength(m: Mixture, alpha_end: float, tol: float = 1e-8) -> float:
    """Length of the ridgeline path from t = 0 to ``alpha_end`` (K = 2)."""
    _require_two(m)
    if not 0.0 <= alpha_end <= 1.0:
        raise ValueError("alpha_end must lie in [0, 1]")
    curve = pair_curve(m, 0, 1)
    return float(integrate_intervals(curve.speed, [0.0, alpha_end], tol)[0])


def cumulative_arclength(m: Mixture, ts, tol: float = 1e-8) -> np.ndarray:
    """Arclength at each sorted node of ``ts`` (starting from t = 0)."""
    _require_two(m)
    ts = np.asarray(ts, dtype=float)
    edges = np.concatenate([[0.0], ts]) if ts[0] > 0 else ts
    pieces = integrate_intervals(pair_curve(m, 0, 1).speed, edges, tol)
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    return cum[1:] if ts[0] > 0 else cum


@dataclass(frozen=True)
class Profile:
    alpha: np.ndarray
    arclength: np.ndarray | None
    x: np.ndarray
    log_h: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return np.exp(self.log_h)

    @property
    def position(self) -> np.ndarray:
        return self.alpha if self.arclength is None else self.arclength

    def local_maxima(self) -> np.ndarray:
        return _extrema_1d(self.log_h, +1)

    def local_minima(self) -> np.ndarray:
        """Interior minima only; the ends of the ridgeline are not critical points."""
        return _extrema_1d(self.log_h, -1, endpoints=False)


def _extrema_1d(values: np.ndarray, sense: int, endpoints: bool = True) -> np.ndarray:
    """Indices of local maxima (sense=+1) or minima (-1).

    Runs of tied values are collapsed first so a flat stretch counts once;
    a run touching either end of the array is an endpoint run.
    """
    y = sense * values
    starts = [0]
    for n in range(1, y.size):
        if abs(y[n] - y[starts[-1]]) > TIE_TOL * max(1.0, abs(y[n])):
            starts.append(n)
    idx = np.array(starts)
    z = y[idx]
    if z.size == 1:
        return idx[:1] if sense > 0 and endpoints else idx[:0]
    left = np.concatenate([[-np.inf], z[:-1]])
    right = np.concatenate([z[1:], [-np.inf]])
    hit = (z > left) & (z > right)
    if not endpoints:
        hit[0] = hit[-1] = False
    return idx[hit]


def elevation_profile(m: Mixture, n_samples: int = 4096, axis: str = "alpha") -> Profile:
    """Elevation along the ridgeline on a uniform grid plus geometric endpoint ladders (K = 2)."""
    _require_two(m)
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    if axis not in ("alpha", "arclength"):
        raise ValueError("axis must be 'alpha' or 'arclength'")
    ts = composite_grid(n_samples)
    x = pair_curve(m, 0, 1).x(ts)
    log_h = model.log_density(m, x)
    arc = cumulative_arclength(m, ts) if axis == "arclength" else None
    return Profile(ts, arc, x, log_h)


# --------------------------------------------------------------------------
# three-component simplex grid


@dataclass(frozen=True)
class TriangleGrid:
    resolution: int
    index: np.ndarray  # (N, 2) lattice indices (i, j); third is r - i - j
    alpha: np.ndarray  # (N, 3)
    tx: np.ndarray
    ty: np.ndarray
    log_h: np.ndarray
    is_local_max: np.ndarray

    @property
    def h(self) -> np.ndarray:
        return np.exp(self.log_h)

    def maxima(self) -> np.ndarray:
        return self.alpha[self.is_local_max]


LATTICE_STEPS = ((1, -1), (-1, 1), (1, 0), (-1, 0), (0, 1), (0, -1))


def triangle_embedding(alpha) -> tuple[np.ndarray, np.ndarray]:
    a = np.atleast_2d(alpha)
    return a[:, 1] + a[:, 2] / 2.0, a[:, 2] * (math.sqrt(3.0) / 2.0)


def _collapse_images(m: Mixture, alpha: np.ndarray, flags: np.ndarray) -> np.ndarray:
    """Keep one flag per group of flagged nodes sharing a ridgeline image.

    The ridgeline map need not be injective: a whole segment of the simplex
    can land on one data-space point, and its nodes then tie along the
    segment while beating their lattice neighbours.  The kept node is the
    one nearest the group's mean alpha.
    """
    idx = np.flatnonzero(flags)
    if idx.size < 2:
        return flags
    x = ridgeline_points(m, alpha[idx])
    tol = SAME_POINT_TOL * model.length_scale(m)
    out = np.zeros_like(flags)
    unassigned = np.ones(idx.size, dtype=bool)
    for n in range(idx.size):
        if not unassigned[n]:
            continue
        group = unassigned & (np.max(np.abs(x - x[n]), axis=1) <= tol)
        unassigned &= ~group
        members = idx[group]
        centre = alpha[members].mean(axis=0)
        out[members[np.argmin(np.sum((alpha[members] - centre) ** 2, axis=1))]] = True
    return out


def simplex_grid_elevation(m: Mixture, resolution: int = 400) -> TriangleGrid:
    """Barycentric grid alpha = (i, j, r - i - j) / r with strict local-maximum flags (K = 3).

    Flagged nodes whose ridgeline images coincide are reported once.
    """
    if m.k != 3:
        raise NotThreeComponents(f"operation needs K = 3, mixture has K = {m.k}")
    r = int(resolution)
    if r < 2:
        raise ValueError("resolution must be at least 2")
    ii, jj = np.meshgrid(np.arange(r + 1), np.arange(r + 1), indexing="ij")
    mask = ii + jj <= r
    ii, jj = ii[mask], jj[mask]
    alpha = np.stack([ii, jj, r - ii - jj], axis=1) / r
    log_h = log_elevations(m, alpha)
    table = np.full((r + 3, r + 3), -np.inf)
    table[ii + 1, jj + 1] = log_h
    is_max = np.ones(ii.size, dtype=bool)
    for di, dj in LATTICE_STEPS:
        nb = table[ii + 1 + di, jj + 1 + dj]
        # kk = r - i - j must stay >= 0: the padded table already returns -inf past the hypotenuse
        beyond = (ii + di) + (jj + dj) > r
        nb = np.where(beyond, -np.inf, nb)
        is_max &= log_h > nb + TIE_TOL * np.maximum(1.0, np.abs(log_h))
    is_max = _collapse_images(m, alpha, is_max)
    tx, ty = triangle_embedding(alpha)
    return TriangleGrid(r, np.stack([ii, jj], axis=1), alpha, tx, ty, log_h, is_max)


def discrete_saddles(grid: TriangleGrid) -> np.ndarray:
    """Interior lattice nodes whose neighbour ring changes sign at least four times."""
    r = grid.resolution
    table = np.full((r + 3, r + 3), np.nan)
    ii, jj = grid.index[:, 0], grid.index[:, 1]
    table[ii + 1, jj + 1] = grid.log_h
    ring = ((1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1))  # cyclic order around a node
    diffs = np.stack([table[ii + 1 + a, jj + 1 + b] - grid.log_h for a, b in ring], axis=1)
    interior = np.all(np.isfinite(diffs), axis=1) & (ii + jj < r)
    sg = np.sign(diffs)
    changes = np.sum(sg != np.roll(sg, 1, axis=1), axis=1)
    return grid.alpha[interior & (changes >= 4)]


# --------------------------------------------------------------------------
# critical-point classification


class CriticalKind(str, enum.Enum):
    MODE = "mode"
    SADDLE = "saddle"
    LOCAL_MIN = "local_min"


@dataclass(frozen=True)
class CriticalPoint:
    alpha: np.ndarray
    x: np.ndarray
    elevation: float
    log_elevation: float
    neg_eigs: int
    kind: CriticalKind
    eigenvalues: np.ndarray
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha.tolist(),
            "x": self.x.tolist(),
            "elevation": self.elevation,
            "kind": self.kind.value,
            "neg_eigs": self.neg_eigs,
            "degenerate": self.degenerate,
        }


def classify_point(m: Mixture, x, alpha=None, grad_tol: float = CRITICAL_GRAD_TOL) -> CriticalPoint:
    """Classify a critical point of g given in data space.

    ``alpha`` defaults to the posterior weights at ``x``, which equal the
    simplex coordinates of any critical point.
    """
    x = np.asarray(x, dtype=float)
    rel = model.relative_gradient(m, x)
    if not rel <= grad_tol:
        raise NotCritical(f"relative gradient {rel:.3e} exceeds {grad_tol:.1e}")
    if alpha is None:
        alpha = model.posterior(m, x)
    # at a critical point the Hessians of g and log g differ by the positive factor g
    eig = np.linalg.eigvalsh(model.hessian_log_density(m, x))
    radius = float(np.max(np.abs(eig)))
    degenerate = bool(np.any(np.abs(eig) <= DEGENERATE_EIG_RTOL * radius))
    neg = int(np.sum(eig < 0))
    if neg == m.dim:
        kind = CriticalKind.MODE
    elif neg == 0:
        kind = CriticalKind.LOCAL_MIN
    else:
        kind = CriticalKind.SADDLE
    if kind is CriticalKind.LOCAL_MIN and m.dim > m.k - 1 and not degenerate:
        raise InternalInconsistency(
            f"local minimum at x={x.tolist()} although D={m.dim} > K-1={m.k - 1}"
        )
    lg = model.log_density(m, x)
    return CriticalPoint(np.asarray(alpha, dtype=float), x, math.exp(lg), lg, neg, kind, eig, degenerate)


def classify_critical(m: Mixture, alpha, grad_tol: float = CRITICAL_GRAD_TOL) -> CriticalPoint:
    """Hessian classification of the critical point x*(alpha)."""
    a = as_alpha(m, alpha)
    return classify_point(m, ridgeline_point(m, a), a, grad_tol)
