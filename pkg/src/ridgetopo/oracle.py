"""Brute-force checks that never look at the ridgeline.

Modes come from a dense grid (or low-discrepancy starts) in data space,
polished by plain ascent on log g.  Derivatives are checked against central
finite differences of the density itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter
from scipy.stats import qmc

from . import model
from .errors import DimensionTooLarge
from .model import Mixture

log = logging.getLogger(__name__)

MAX_GRID_DIM = 3
BOX_SDS = 4.0
ARMIJO = 1e-4
MAX_ASCENT_ITER = 500
ASCENT_GTOL = 1e-10
MERGE_TOL = 1e-6
CHUNK = 1 << 20


@dataclass(frozen=True)
class GridSpec:
    lower: np.ndarray
    upper: np.ndarray
    points: int

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("grid bounds must be finite and of equal length")
        if np.any(lo >= hi):
            raise ValueError("every lower bound must be below its upper bound")
        if self.points < 3:
            raise ValueError("a grid needs at least 3 points per dimension")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(a, b, self.points) for a, b in zip(self.lower, self.upper)]


def default_points(dim: int) -> int:
    return 401 if dim <= 2 else 121


def default_box(m: Mixture) -> tuple[np.ndarray, np.ndarray]:
    """Means' bounding box padded by four of the largest marginal standard deviations."""
    sd = np.sqrt(np.max([np.diag(c.cov) for c in m.components], axis=0))
    pad = BOX_SDS * np.max(sd)
    return m.means.min(axis=0) - pad, m.means.max(axis=0) + pad


def default_grid(m: Mixture, points: int | None = None) -> GridSpec:
    lo, hi = default_box(m)
    return GridSpec(lo, hi, points or default_points(m.dim))


def _grid_log_density(m: Mixture, spec: GridSpec) -> np.ndarray:
    axes = spec.axes()
    shape = tuple(len(a) for a in axes)
    mesh = np.meshgrid(*axes, indexing="ij")
    flat = np.stack([g.ravel() for g in mesh], axis=1)
    out = np.empty(flat.shape[0])
    for start in range(0, flat.shape[0], CHUNK):
        out[start:start + CHUNK] = model.log_density(m, flat[start:start + CHUNK])
    return out.reshape(shape), flat


def ascend(m: Mixture, x0, max_iter: int = MAX_ASCENT_ITER, gtol: float = ASCENT_GTOL) -> tuple[np.ndarray, np.ndarray]:
    """Backtracking ascent on log g from every row of ``x0``.

    The direction is the Newton step where the Hessian of log g is negative
    definite and the covariance-scaled gradient elsewhere; step lengths obey
    the Armijo rule.  Returns (points, converged flags).
    """
    x = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    n, d = x.shape
    ell = model.length_scale(m)
    converged = np.zeros(n, dtype=bool)
    f = model.log_density(m, x)
    active = np.arange(n)
    for _ in range(max_iter):
        if active.size == 0:
            break
        xa = x[active]
        g = model.grad_log_density(m, xa)
        done = np.linalg.norm(g, axis=1) * ell <= gtol
        converged[active[done]] = True
        active, xa, g = active[~done], xa[~done], g[~done]
        if active.size == 0:
            break
        h = model.hessian_log_density(m, xa)
        eig = np.linalg.eigvalsh(h)
        concave = eig[:, -1] < 0
        step = g * ell * ell
        if concave.any():
            step[concave] = -np.linalg.solve(h[concave], g[concave][:, :, None])[:, :, 0]
        slope = np.einsum("nd,nd->n", g, step)
        t = np.ones(active.size)
        fa = f[active]
        # below this the Armijo gain is lost in the rounding of log g
        noise = 8.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(fa))
        pending = np.ones(active.size, dtype=bool)
        for _ in range(60):
            cand = xa[pending] + t[pending, None] * step[pending]
            fc = model.log_density(m, cand)
            gain = t[pending] * slope[pending]
            ok = fc >= fa[pending] + ARMIJO * gain
            ok |= (gain <= noise[pending]) & (fc >= fa[pending] - noise[pending])
            idx = np.flatnonzero(pending)
            xa[idx[ok]] = cand[ok]
            fa[idx[ok]] = fc[ok]
            pending[idx[ok]] = False
            if not pending.any():
                break
            t[pending] *= 0.5
        x[active] = xa
        f[active] = fa
        # a point that could not move at all has stalled
        stalled = pending
        active = active[~stalled]
    if active.size:
        g = model.grad_log_density(m, x[active])
        converged[active] = np.linalg.norm(g, axis=1) * ell <= gtol
    g_all = model.grad_log_density(m, x)
    converged |= np.linalg.norm(np.atleast_2d(g_all), axis=1) * ell <= gtol
    return x, converged


def merge_modes(points, tol: float = MERGE_TOL) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for p in points:
        if all(np.max(np.abs(p - k)) >= tol for k in kept):
            kept.append(p)
    return sorted(kept, key=tuple)


def _is_mode(m: Mixture, x) -> bool:
    return bool(np.linalg.eigvalsh(model.hessian_log_density(m, x))[-1] < 0)


def grid_modes(m: Mixture, spec: GridSpec | None = None) -> list[np.ndarray]:
    """Modes of g from strict local maxima of a dense grid, each polished by ascent.

    Maxima on the edge of the box are kept but logged, since a mode outside
    the box would show up there.
    """
    if m.dim > MAX_GRID_DIM:
        raise DimensionTooLarge(f"grid oracle handles D <= {MAX_GRID_DIM}, got D = {m.dim}")
    spec = spec or default_grid(m)
    values, flat = _grid_log_density(m, spec)
    footprint = np.ones((3,) * m.dim, dtype=bool)
    footprint[(1,) * m.dim] = False
    neighbours = maximum_filter(values, footprint=footprint, mode="constant", cval=-np.inf)
    peaks = np.flatnonzero((values > neighbours).ravel())
    edge = np.zeros(values.shape, dtype=bool)
    for ax in range(m.dim):
        sl = [slice(None)] * m.dim
        sl[ax] = 0
        edge[tuple(sl)] = True
        sl[ax] = -1
        edge[tuple(sl)] = True
    if np.any(edge.ravel()[peaks]):
        log.warning("grid maximum on the search-box boundary; a mode may lie outside the box")
    x, ok = ascend(m, flat[peaks])
    found = [p for p, good in zip(x, ok) if good and _is_mode(m, p)]
    if not np.all(ok):
        log.warning("%d grid maxima did not polish to gradient tolerance", int(np.sum(~ok)))
    return merge_modes(found)


def multistart_ascent(m: Mixture, n_starts: int = 500, seed: int = 0) -> list[np.ndarray]:
    """Modes reached by ascent from scrambled Halton starts in the default box."""
    if n_starts < 1:
        raise ValueError("n_starts must be positive")
    lo, hi = default_box(m)
    u = qmc.Halton(d=m.dim, scramble=True, seed=seed).random(n_starts)
    x, ok = ascend(m, qmc.scale(u, lo, hi))
    return merge_modes([p for p, good in zip(x, ok) if good and _is_mode(m, p)])


# --------------------------------------------------------------------------
# finite differences


def fd_gradient(f, x, step: float = 1e-5) -> np.ndarray:
    """Central differences with step scaled by max(1, |x_k|)."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for k in range(x.size):
        h = step * max(1.0, abs(x[k]))
        e = np.zeros_like(x)
        e[k] = h
        out[k] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def fd_hessian(f, x, step: float = 1e-4) -> np.ndarray:
    """Second central differences of a scalar function."""
    x = np.asarray(x, dtype=float)
    d = x.size
    hs = step * np.maximum(1.0, np.abs(x))
    out = np.empty((d, d))
    f0 = f(x)
    for a in range(d):
        ea = np.zeros(d)
        ea[a] = hs[a]
        out[a, a] = (f(x + ea) - 2 * f0 + f(x - ea)) / hs[a] ** 2
        for b in range(a + 1, d):
            eb = np.zeros(d)
            eb[b] = hs[b]
            val = (f(x + ea + eb) - f(x + ea - eb) - f(x - ea + eb) + f(x - ea - eb)) / (4 * hs[a] * hs[b])
            out[a, b] = out[b, a] = val
    return out


def derivative_errors(m: Mixture, x) -> tuple[float, float]:
    """Relative errors of the analytic gradient and Hessian of g against finite differences."""
    dens = lambda z: model.density(m, z)  # noqa: E731
    ga, ha = model.gradient(m, x), model.hessian(m, x)
    gf, hf = fd_gradient(dens, x), fd_hessian(dens, x)
    eg = np.max(np.abs(ga - gf)) / max(np.max(np.abs(ga)), np.finfo(float).tiny)
    eh = np.max(np.abs(ha - hf)) / max(np.max(np.abs(ha)), np.finfo(float).tiny)
    return float(eg), float(eh)


# --------------------------------------------------------------------------
# report verification


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


@dataclass(frozen=True)
class Diagnostics:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def get(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "measured": c.measured,
                 "tolerance": c.tolerance, "detail": c.detail}
                for c in self.checks
            ],
        }


def random_points(m: Mixture, n: int, seed: int = 0) -> np.ndarray:
    """Points drawn from the mixture's components, one standard deviation scale."""
    rng = np.random.default_rng(seed)
    comp = rng.integers(0, m.k, size=n)
    z = rng.standard_normal((n, m.dim))
    return np.array([m.means[c] + m.components[c].chol @ zz for c, zz in zip(comp, z)])


def verify_report(m: Mixture, report, grid: GridSpec | None = None, seed: int = 0,
                  location_tol: float = 1e-3) -> Diagnostics:
    """Cross-check a topography report: gradients, posterior identity, grid modes, derivatives."""
    checks = []
    cps = report.critical_points
    grad = max((model.relative_gradient(m, c.x) for c in cps), default=0.0)
    checks.append(Check("gradient", grad <= 1e-8, grad, 1e-8))
    post = max((float(np.max(np.abs(model.posterior(m, c.x) - c.alpha))) for c in cps), default=0.0)
    checks.append(Check("posterior_identity", post <= 1e-8, post, 1e-8))

    if m.dim <= MAX_GRID_DIM:
        oracle = grid_modes(m, grid)
        modes = [c.x for c in report.modes]
        worst = 0.0
        matched = len(oracle) == len(modes)
        for x in modes:
            dist = min((float(np.max(np.abs(x - o))) for o in oracle), default=np.inf)
            worst = max(worst, dist)
        matched = matched and worst <= location_tol
        checks.append(Check("grid_modes", matched, worst, location_tol,
                            f"report {len(modes)} modes, grid {len(oracle)}"))

    pts = random_points(m, 20, seed)
    errs = np.array([derivative_errors(m, p) for p in pts])
    checks.append(Check("fd_gradient", bool(errs[:, 0].max() <= 1e-5), float(errs[:, 0].max()), 1e-5))
    checks.append(Check("fd_hessian", bool(errs[:, 1].max() <= 1e-4), float(errs[:, 1].max()), 1e-4))
    return Diagnostics(checks)
