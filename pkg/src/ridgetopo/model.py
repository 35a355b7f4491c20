"""Gaussian mixture containers, density derivatives and model-file I/O.

All likelihood arithmetic happens in the log domain.  Derivatives of the
density ``g`` are assembled as ``g(x)`` times the corresponding expression in
posterior weights, so nothing underflows before the final multiplication.

Every evaluation function accepts either a single point of shape ``(D,)`` or a
batch of shape ``(N, D)`` and returns a matching leading shape.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import logsumexp

from .errors import BadWeights, DimensionMismatch, InvalidModel, NotPositiveDefinite

LOG_2PI = math.log(2.0 * math.pi)
SYMMETRY_RTOL = 1e-12
WEIGHT_SUM_ATOL = 1e-12
WEIGHT_RENORM_ATOL = 1e-9

FIXTURE_DIR = Path(__file__).parent / "fixtures"


@dataclass(frozen=True, eq=False)
class Component:
    """One normal component with cached Cholesky factor, precision and log-determinant."""

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray = field(init=False, repr=False)
    prec: np.ndarray = field(init=False, repr=False)
    logdet: float = field(init=False, repr=False)

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if mean.ndim != 1:
            raise DimensionMismatch(f"mean must be a vector, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise DimensionMismatch(
                f"covariance shape {cov.shape} does not match mean length {mean.size}"
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InvalidModel("component parameters must be finite")
        scale = max(np.max(np.abs(cov)), np.finfo(float).tiny)
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_RTOL * scale:
            raise NotPositiveDefinite("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        try:
            c, lower = cho_factor(cov, lower=True)
        except np.linalg.LinAlgError as exc:
            raise NotPositiveDefinite(f"covariance is not positive definite: {exc}") from None
        chol = np.tril(c)
        prec = cho_solve((c, lower), np.eye(mean.size))
        prec = 0.5 * (prec + prec.T)
        for name, value in (
            ("mean", mean),
            ("cov", cov),
            ("chol", chol),
            ("prec", prec),
            ("logdet", 2.0 * float(np.sum(np.log(np.diag(chol))))),
        ):
            if isinstance(value, np.ndarray):
                value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def dim(self) -> int:
        return self.mean.size

    def same_as(self, other: "Component") -> bool:
        return np.array_equal(self.mean, other.mean) and np.array_equal(self.cov, other.cov)


@dataclass(frozen=True, eq=False)
class Mixture:
    """K weighted normal components sharing one dimension D.

    Weights within 1e-9 of summing to one are renormalised; anything further
    off raises ``BadWeights``.
    """

    components: tuple[Component, ...]
    weights: np.ndarray

    def __post_init__(self):
        comps = tuple(
            c if isinstance(c, Component) else Component(*c) for c in self.components
        )
        if len(comps) < 1:
            raise InvalidModel("a mixture needs at least one component")
        dims = {c.dim for c in comps}
        if len(dims) != 1:
            raise DimensionMismatch(f"components disagree on dimension: {sorted(dims)}")
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if w.shape != (len(comps),):
            raise DimensionMismatch(f"{w.size} weights for {len(comps)} components")
        if not np.all(np.isfinite(w)) or np.any(w < 0) or np.any(w > 1):
            raise BadWeights(f"weights must lie in [0, 1], got {w.tolist()}")
        total = float(np.sum(w))
        if abs(total - 1.0) > WEIGHT_RENORM_ATOL:
            raise BadWeights(f"weights sum to {total!r}, not 1")
        if abs(total - 1.0) > 0.0:
            w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "weights", w)

        means = np.stack([c.mean for c in comps])
        precs = np.stack([c.prec for c in comps])
        prec_means = np.einsum("kde,ke->kd", precs, means)
        with np.errstate(divide="ignore"):
            log_w = np.log(w)
        log_norm = -0.5 * (self.dim * LOG_2PI + np.array([c.logdet for c in comps]))
        for name, arr in (
            ("means", means),
            ("precs", precs),
            ("prec_means", prec_means),
            ("log_weights", log_w),
            ("log_norms", log_norm),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def covs(self) -> np.ndarray:
        return np.stack([c.cov for c in self.components])

    @classmethod
    def from_arrays(cls, means, covs, weights) -> "Mixture":
        means = np.asarray(means, dtype=float)
        if means.ndim == 1:
            means = means[:, None]
        covs = np.asarray(covs, dtype=float)
        if covs.ndim == 1:
            covs = covs[:, None, None]
        if len(means) != len(covs):
            raise DimensionMismatch(f"{len(means)} means but {len(covs)} covariances")
        return cls(tuple(Component(mu, s) for mu, s in zip(means, covs)), weights)

    def with_weights(self, weights) -> "Mixture":
        return Mixture(self.components, weights)

    def submixture(self, indices: Sequence[int], weights=None) -> "Mixture":
        """Mixture of the selected components; weights renormalised unless given."""
        idx = list(indices)
        if weights is None:
            w = self.weights[idx]
            total = float(np.sum(w))
            if total <= 0:
                raise BadWeights(f"components {idx} carry zero total weight")
            weights = w / total
        return Mixture(tuple(self.components[i] for i in idx), weights)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "weights": self.weights.tolist(),
            "components": [
                {"mean": c.mean.tolist(), "cov": c.cov.tolist()} for c in self.components
            ],
        }


def validate_mixture(raw: dict) -> Mixture:
    """Build a Mixture from a parsed model-file record."""
    if not isinstance(raw, dict):
        raise InvalidModel("model record must be a JSON object")
    for key in ("weights", "components"):
        if key not in raw:
            raise InvalidModel(f"model record is missing '{key}'")
    comps = raw["components"]
    if not isinstance(comps, list) or not comps:
        raise InvalidModel("'components' must be a non-empty list")
    built = []
    for n, c in enumerate(comps, start=1):
        if not isinstance(c, dict) or "mean" not in c or "cov" not in c:
            raise InvalidModel(f"component {n} needs 'mean' and 'cov'")
        try:
            mean = np.asarray(c["mean"], dtype=float)
            cov = np.asarray(c["cov"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidModel(f"component {n}: {exc}") from None
        if "dim" in raw and (mean.ndim != 1 or mean.size != int(raw["dim"])):
            raise DimensionMismatch(
                f"component {n}: mean has length {mean.size}, model dim is {raw['dim']}"
            )
        try:
            built.append(Component(mean, cov))
        except InvalidModel as exc:
            raise type(exc)(f"component {n}: {exc}") from None
    try:
        weights = np.asarray(raw["weights"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise BadWeights(str(exc)) from None
    return Mixture(tuple(built), weights)


def load_mixture(path) -> Mixture:
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidModel(f"{path}: not valid JSON ({exc})") from None
    return validate_mixture(raw)


def save_mixture(m: Mixture, path) -> None:
    write_text_atomic(path, json.dumps(m.to_dict(), indent=2) + "\n")


def load_example(n: int) -> Mixture:
    """One of the bundled fixtures, ``n`` in 1..4."""
    return load_mixture(FIXTURE_DIR / f"example{n}.json")


def write_text_atomic(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


# --------------------------------------------------------------------------
# evaluation


def _points(m: Mixture, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 and m.dim == 1:
        x = x.reshape(1)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    if pts.ndim != 2 or pts.shape[1] != m.dim:
        raise DimensionMismatch(f"expected points of dimension {m.dim}, got shape {x.shape}")
    return pts, single


def _residuals(m: Mixture, pts: np.ndarray):
    diff = pts[:, None, :] - m.means[None, :, :]  # (N, K, D)
    v = np.einsum("kde,nke->nkd", m.precs, diff)  # precision-weighted residuals
    maha = np.einsum("nkd,nkd->nk", diff, v)
    return v, maha


def _joint_log(m: Mixture, pts: np.ndarray):
    v, maha = _residuals(m, pts)
    with np.errstate(invalid="ignore"):
        joint = m.log_weights + m.log_norms - 0.5 * maha
    return joint, v


def component_log_densities(m: Mixture, x) -> np.ndarray:
    """log phi_j(x) for every component, shape (..., K)."""
    pts, single = _points(m, x)
    _, maha = _residuals(m, pts)
    out = m.log_norms - 0.5 * maha
    return out[0] if single else out


def log_density(m: Mixture, x):
    pts, single = _points(m, x)
    joint, _ = _joint_log(m, pts)
    out = logsumexp(joint, axis=1)
    return float(out[0]) if single else out


def density(m: Mixture, x):
    lg = log_density(m, x)
    return math.exp(lg) if isinstance(lg, float) else np.exp(lg)


def _posterior_and_v(m: Mixture, pts: np.ndarray):
    joint, v = _joint_log(m, pts)
    lg = logsumexp(joint, axis=1)
    w = np.exp(joint - lg[:, None])
    return w, v, lg


def posterior(m: Mixture, x) -> np.ndarray:
    """Posterior component responsibilities pi_j phi_j(x) / g(x)."""
    pts, single = _points(m, x)
    w, _, _ = _posterior_and_v(m, pts)
    return w[0] if single else w


def grad_log_density(m: Mixture, x) -> np.ndarray:
    pts, single = _points(m, x)
    w, v, _ = _posterior_and_v(m, pts)
    out = -np.einsum("nk,nkd->nd", w, v)
    return out[0] if single else out


def hessian_log_density(m: Mixture, x) -> np.ndarray:
    pts, single = _points(m, x)
    w, v, _ = _posterior_and_v(m, pts)
    out = _hess_log(m, w, v)
    return out[0] if single else out


def _hess_log(m, w, v):
    u = np.einsum("nk,nkd->nd", w, v)
    outer = np.einsum("nk,nkd,nke->nde", w, v, v)
    curv = np.einsum("nk,kde->nde", w, m.precs)
    return outer - curv - u[:, :, None] * u[:, None, :]


def gradient(m: Mixture, x) -> np.ndarray:
    """Analytic gradient of g: -sum_j pi_j phi_j(x) P_j (x - mu_j)."""
    pts, single = _points(m, x)
    w, v, lg = _posterior_and_v(m, pts)
    out = -np.exp(lg)[:, None] * np.einsum("nk,nkd->nd", w, v)
    return out[0] if single else out


def hessian(m: Mixture, x) -> np.ndarray:
    """Analytic Hessian of g: sum_j pi_j phi_j(x) [v_j v_j' - P_j], v_j = P_j (x - mu_j)."""
    pts, single = _points(m, x)
    w, v, lg = _posterior_and_v(m, pts)
    h = np.einsum("nk,nkd,nke->nde", w, v, v) - np.einsum("nk,kde->nde", w, m.precs)
    h = np.exp(lg)[:, None, None] * h
    h = 0.5 * (h + np.swapaxes(h, 1, 2))
    return h[0] if single else h


def length_scale(m: Mixture) -> float:
    """Smallest marginal standard deviation over all components (sqrt of min covariance eigenvalue)."""
    return float(min(np.sqrt(np.linalg.eigvalsh(c.cov)[0]) for c in m.components))


def relative_gradient(m: Mixture, x) -> float:
    """Gradient norm of g measured against the elevation scale g(x) / length_scale."""
    return float(np.linalg.norm(grad_log_density(m, x)) * length_scale(m))


def check_simplex(alpha, k: int | None = None, atol: float = WEIGHT_SUM_ATOL) -> np.ndarray:
    """Validate a point of the unit simplex and return it as an array."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    if a.ndim != 1 or (k is not None and a.size != k):
        raise DimensionMismatch(f"simplex point needs {k} coordinates, got shape {a.shape}")
    if np.any(a < -atol) or np.any(a > 1 + atol) or abs(a.sum() - 1.0) > atol:
        raise InvalidModel(f"not a point of the unit simplex: {a.tolist()}")
    return np.clip(a, 0.0, 1.0)
