"""Whole-mixture topography: critical points, pairwise reports and linkage graphs."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.stats import qmc

from . import model, piplot
from .curvature import SpecialCaseReport, special_case_analysis
from .errors import NotCritical, NumericalFailure, ZeroWeightPair
from .model import Mixture
from .ridgeline import (
    CriticalKind,
    CriticalPoint,
    classify_point,
    discrete_saddles,
    ridgeline_point,
    ridgeline_points,
    simplex_grid_elevation,
)

MERGE_TOL = 1e-6
GRID_RESOLUTION = 400
N_MULTISTART = 1000
MM_MAX_ITER = 2000
NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-13


class Method(str, enum.Enum):
    SINGLE = "SingleComponent"
    EXACT_K2 = "ExactK2"
    GRID_K3 = "GridK3"
    MULTISTART = "MultistartKGE4"


# --------------------------------------------------------------------------
# local refinement in data space


def mm_ascent(m: Mixture, x0, max_iter: int = MM_MAX_ITER, tol: float = 1e-12) -> np.ndarray:
    """Ascend h by the fixed-point map x <- x*(posterior(x)), batched over rows of ``x0``.

    Each step maximises a Jensen lower bound of log g, so the elevation never
    decreases; fixed points are exactly the critical points on the ridgeline.
    """
    x = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    active = np.ones(len(x), dtype=bool)
    scale = model.length_scale(m)
    for _ in range(max_iter):
        if not active.any():
            break
        new = ridgeline_points(m, model.posterior(m, x[active]))
        moved = np.max(np.abs(new - x[active]), axis=1)
        x[active] = new
        idx = np.flatnonzero(active)
        active[idx[moved <= tol * scale]] = False
    return x


def newton_polish(m: Mixture, x0, max_iter: int = NEWTON_MAX_ITER, tol: float = NEWTON_TOL) -> np.ndarray:
    """Newton iteration on grad log g = 0, damped on the gradient norm.

    Converges to whichever critical point (mode or saddle) is nearby.
    """
    x = np.asarray(x0, dtype=float).copy()
    ell = model.length_scale(m)
    grad = model.grad_log_density(m, x)
    norm = np.linalg.norm(grad)
    for _ in range(max_iter):
        if norm * ell <= tol:
            break
        hess = model.hessian_log_density(m, x)
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = grad * ell * ell
        t = 1.0
        for _ in range(40):
            cand = x + t * step
            g_new = model.grad_log_density(m, cand)
            n_new = np.linalg.norm(g_new)
            if n_new < norm:
                break
            t *= 0.5
        else:
            break
        x, grad, norm = cand, g_new, n_new
    return x


def refine(m: Mixture, x0, ascend: bool) -> np.ndarray:
    x = mm_ascent(m, x0)[0] if ascend else np.asarray(x0, dtype=float)
    return newton_polish(m, x)


def _classify_refined(m: Mixture, x, grad_tol: float = 1e-8) -> CriticalPoint | None:
    try:
        return classify_point(m, x, grad_tol=grad_tol)
    except NotCritical:
        return None


def merge_points(points: list[CriticalPoint], tol: float = MERGE_TOL) -> list[CriticalPoint]:
    """Drop points whose simplex coordinates lie within ``tol`` (inf-norm) of an earlier one."""
    kept: list[CriticalPoint] = []
    for cp in points:
        if all(np.max(np.abs(cp.alpha - k.alpha)) >= tol for k in kept):
            kept.append(cp)
    return kept


# --------------------------------------------------------------------------
# pairwise analysis


@dataclass(frozen=True)
class PairReport:
    pair: tuple[int, int]
    pi_pair: float
    mode_count: int
    critical_points: list[CriticalPoint]
    bands: piplot.ModalityBands
    curvature: SpecialCaseReport

    @property
    def modes(self) -> list[CriticalPoint]:
        return [c for c in self.critical_points if c.kind is CriticalKind.MODE]

    @property
    def saddles(self) -> list[CriticalPoint]:
        return [c for c in self.critical_points if c.kind is not CriticalKind.MODE]

    def saddle_ratio(self) -> float | None:
        """Lowest saddle elevation over lowest peak elevation, for multimodal pairs."""
        if self.mode_count < 2 or not self.saddles:
            return None
        return min(c.elevation for c in self.saddles) / min(c.elevation for c in self.modes)

    def to_dict(self) -> dict:
        return {
            "pair": [self.pair[0] + 1, self.pair[1] + 1],
            "pi_pair": self.pi_pair,
            "mode_count": self.mode_count,
            "critical_points": [c.to_dict() for c in self.critical_points],
            "bands": self.bands.to_dict(),
            "curvature": self.curvature.to_dict(),
        }


def pair_weight(m: Mixture, i: int, j: int) -> float:
    """Relative weight of component j within the pair (the alpha = 1 end)."""
    total = m.weights[i] + m.weights[j]
    if total <= 0:
        raise ZeroWeightPair(f"components {i + 1} and {j + 1} both have zero weight")
    return float(m.weights[j] / total)


def analyze_pair(m: Mixture, i: int, j: int, equal_weights: bool = False) -> PairReport:
    """Bands, curvature report and critical points of the (i, j) submixture.

    The pair proportion is the renormalised weight of j, or 0.5 with
    ``equal_weights`` for a weight-free structural reading.
    """
    pi = 0.5 if equal_weights else pair_weight(m, i, j)
    bands = piplot.modality_bands(m, i, j)
    report = special_case_analysis(m, i, j)
    if 0.0 < pi < 1.0 and not piplot.pair_curve(m, i, j).coincident:
        cps = piplot.critical_points_for_pi(m, i, j, pi)
    else:
        # one effective component, or a ridgeline collapsed to a single point
        sub = piplot.pair_mixture(m, i, j, pi)
        cps = [classify_point(sub, newton_polish(sub, sub.means[1 if pi >= 0.5 else 0]))]
    n_modes = sum(c.kind is CriticalKind.MODE for c in cps)
    return PairReport((i, j), pi, n_modes, cps, bands, report)


# --------------------------------------------------------------------------
# full topography


@dataclass
class TopographyReport:
    k: int
    dim: int
    weights: list[float]
    method: Method
    critical_points: list[CriticalPoint]
    heuristic: bool = False
    pairs: list[PairReport] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def modes(self) -> list[CriticalPoint]:
        return [c for c in self.critical_points if c.kind is CriticalKind.MODE]

    @property
    def mode_count(self) -> int:
        return len(self.modes)

    @property
    def saddle_count(self) -> int:
        return sum(c.kind is CriticalKind.SADDLE for c in self.critical_points)

    def summary(self) -> str:
        n, s = self.mode_count, self.saddle_count
        text = f"{n} mode{'s' if n != 1 else ''}, {s} saddle{'s' if s != 1 else ''}"
        return text + (" (heuristic)" if self.heuristic else "")

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "dim": self.dim,
            "weights": self.weights,
            "method": self.method.value,
            "heuristic": self.heuristic,
            "mode_count": self.mode_count,
            "saddle_count": self.saddle_count,
            "critical_points": [c.to_dict() for c in self.critical_points],
            "pairs": [p.to_dict() for p in self.pairs],
            "diagnostics": list(self.diagnostics),
        }


def _lift(cp: CriticalPoint, keep: list[int], k: int) -> CriticalPoint:
    alpha = np.zeros(k)
    alpha[keep] = cp.alpha
    return CriticalPoint(alpha, cp.x, cp.elevation, cp.log_elevation, cp.neg_eigs, cp.kind,
                         cp.eigenvalues, cp.degenerate)


def full_topography(m: Mixture, resolution: int = GRID_RESOLUTION, n_starts: int = N_MULTISTART,
                    seed: int = 0) -> TopographyReport:
    """Locate and classify the critical points of g by searching the ridgeline manifold.

    K = 2 is exact (pi-equation); K = 3 scans the simplex grid and refines;
    K >= 4 is a seeded multistart ascent and flagged heuristic.  Components
    with zero weight are dropped first and their coordinates reported as 0.
    """
    keep = [n for n in range(m.k) if m.weights[n] > 0]
    sub = m.submixture(keep) if len(keep) < m.k else m
    diags: list[str] = []
    heuristic = False
    pairs: list[PairReport] = []

    if sub.k == 1:
        method = Method.SINGLE
        cps = [classify_point(sub, sub.means[0], np.ones(1))]
    elif sub.k == 2:
        method = Method.EXACT_K2
        pair = analyze_pair(sub, 0, 1)
        pairs.append(pair)
        cps = pair.critical_points
        if piplot.pair_curve(sub, 0, 1).coincident:
            diags.append("component means coincide; ridgeline is a single point")
    elif sub.k == 3:
        method = Method.GRID_K3
        cps = _topography_k3(sub, resolution, diags)
    else:
        method = Method.MULTISTART
        heuristic = True
        cps = _topography_multistart(sub, n_starts, seed, diags)

    cps = [_lift(c, keep, m.k) for c in cps] if len(keep) < m.k else cps
    for c in cps:
        if c.degenerate:
            diags.append(f"DegenerateCritical: near-zero Hessian eigenvalue at x={c.x.tolist()}")
    return TopographyReport(m.k, m.dim, m.weights.tolist(), method, cps, heuristic, pairs, diags)


def _order(cps: list[CriticalPoint]) -> list[CriticalPoint]:
    rank = {CriticalKind.MODE: 0, CriticalKind.SADDLE: 1, CriticalKind.LOCAL_MIN: 2}
    return sorted(cps, key=lambda c: (rank[c.kind], -c.log_elevation, tuple(c.x)))


def _topography_k3(m: Mixture, resolution: int, diags: list[str]) -> list[CriticalPoint]:
    grid = simplex_grid_elevation(m, resolution)
    found: list[CriticalPoint] = []
    for a in grid.maxima():
        cp = _classify_refined(m, refine(m, ridgeline_point(m, a), ascend=True))
        if cp is None:
            diags.append(f"refinement from grid maximum {a.tolist()} did not converge")
        elif cp.kind is CriticalKind.MODE:
            found.append(cp)
    # saddle candidates: discrete grid saddles and every pair's own critical points
    starts = [ridgeline_point(m, a) for a in discrete_saddles(grid)]
    for i in range(3):
        for j in range(i + 1, 3):
            if piplot.pair_curve(m, i, j).coincident:
                continue
            try:
                pr = piplot.critical_points_for_pi(m, i, j, pair_weight(m, i, j))
            except NumericalFailure:
                continue
            starts.extend(c.x for c in pr if c.kind is not CriticalKind.MODE)
    for x0 in starts:
        cp = _classify_refined(m, refine(m, x0, ascend=False))
        if cp is not None:
            found.append(cp)
    return _order(merge_points(_order(found)))


def simplex_starts(k: int, n: int, seed: int) -> np.ndarray:
    """Low-discrepancy points on the K-simplex (normalised exponential spacings of a Halton set)."""
    u = qmc.Halton(d=k, scramble=True, seed=seed).random(n)
    e = -np.log(np.clip(u, 1e-300, 1.0))
    return e / e.sum(axis=1, keepdims=True)


def _topography_multistart(m: Mixture, n_starts: int, seed: int, diags: list[str]) -> list[CriticalPoint]:
    alphas = np.vstack([simplex_starts(m.k, n_starts, seed), np.eye(m.k)])
    xs = mm_ascent(m, ridgeline_points(m, alphas))
    found = []
    for x in xs:
        cp = _classify_refined(m, newton_polish(m, x))
        if cp is not None and cp.kind is CriticalKind.MODE:
            found.append(cp)
    diags.append(f"heuristic: multistart ascent from {len(alphas)} simplex points, no completeness guarantee")
    return _order(merge_points(_order(found)))


# --------------------------------------------------------------------------
# linkage


class LinkReason(str, enum.Enum):
    UNIMODAL = "Unimodal"
    HIGH_PASS = "HighPass"


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    reason: LinkReason
    saddle_ratio: float | None = None


@dataclass(frozen=True)
class LinkageGraph:
    nodes: list[int]
    edges: list[Edge]
    supercomponents: list[list[int]]
    pairs: list[PairReport] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "nodes": [n + 1 for n in self.nodes],
            "edges": [
                {"i": e.i + 1, "j": e.j + 1, "reason": e.reason.value, "saddle_ratio": e.saddle_ratio}
                for e in self.edges
            ],
            "supercomponents": [[n + 1 for n in block] for block in self.supercomponents],
        }

    def to_dot(self) -> str:
        lines = ["graph linkage {"]
        lines += [f"  {n + 1};" for n in self.nodes]
        lines += [f"  {e.i + 1} -- {e.j + 1};" for e in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"


def _blocks(k: int, edges: list[Edge]) -> list[list[int]]:
    rows = [e.i for e in edges] + [e.j for e in edges]
    cols = [e.j for e in edges] + [e.i for e in edges]
    adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(k, k))
    _, labels = connected_components(adj, directed=False)
    blocks: dict[int, list[int]] = {}
    for node, lab in enumerate(labels):
        blocks.setdefault(lab, []).append(node)
    return sorted(blocks.values(), key=lambda b: b[0])


def linkage_graph(m: Mixture, high_pass_tau: float | None = None, equal_weights: bool = False) -> LinkageGraph:
    """Link components whose pair mixture is unimodal (or, given tau, has a high pass)."""
    if m.k < 2:
        raise ValueError("linkage needs at least two components")
    if high_pass_tau is not None and not 0.0 < high_pass_tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    edges, reports = [], []
    for i in range(m.k):
        for j in range(i + 1, m.k):
            rep = analyze_pair(m, i, j, equal_weights=equal_weights)
            reports.append(rep)
            ratio = rep.saddle_ratio()
            if rep.mode_count == 1:
                edges.append(Edge(i, j, LinkReason.UNIMODAL))
            elif high_pass_tau is not None and ratio is not None and ratio >= high_pass_tau:
                edges.append(Edge(i, j, LinkReason.HIGH_PASS, ratio))
    return LinkageGraph(list(range(m.k)), edges, _blocks(m.k, edges), reports)


def supercomponents(m: Mixture) -> list[list[int]]:
    return linkage_graph(m).supercomponents
