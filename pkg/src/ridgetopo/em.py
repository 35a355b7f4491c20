"""CSV ingestion and maximum-likelihood fitting of full-covariance Gaussian mixtures."""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.cluster.vq import kmeans2
from scipy.special import logsumexp

from .errors import DegenerateFit, NotPositiveDefinite, ParseError, TooFewRows
from .model import Mixture

log = logging.getLogger(__name__)

RIDGE = 1e-6
SEED_FLOOR = 1e-3


@dataclass(frozen=True)
class DataMatrix:
    values: np.ndarray
    names: list[str] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] == 0:
            raise ParseError("data must be a non-empty 2-D table")
        if not np.all(np.isfinite(v)):
            raise ParseError("data contains non-finite entries")
        if self.names is not None and len(self.names) != v.shape[1]:
            raise ParseError("number of column names does not match the data")
        object.__setattr__(self, "values", v)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def load_csv(path, has_header: bool = False) -> DataMatrix:
    """Read a rectangular numeric CSV; blank lines are skipped."""
    names = None
    rows: list[list[float]] = []
    width = None
    with Path(path).open(newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if has_header and names is None:
                names = [c.strip() for c in rec]
                width = len(names)
                continue
            if width is None:
                width = len(rec)
            if len(rec) != width:
                raise ParseError(f"line {lineno}: expected {width} fields, found {len(rec)}")
            try:
                rows.append([float(c) for c in rec])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: non-numeric cell ({exc})") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return DataMatrix(np.array(rows), names)


@dataclass(frozen=True)
class FitResult:
    mixture: Mixture
    log_likelihood: float
    history: list[float] = field(default_factory=list)
    converged: bool = True
    seed_index: int = 0


def _log_joint(x, means, covs, weights):
    n, d = x.shape
    out = np.empty((n, len(weights)))
    for k, (mu, cov) in enumerate(zip(means, covs)):
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise DegenerateFit(f"component {k + 1} covariance is singular after regularization") from None
        z = np.linalg.solve(chol, (x - mu).T)
        logdet = 2.0 * np.sum(np.log(np.diag(chol)))
        out[:, k] = np.log(weights[k]) - 0.5 * (d * np.log(2 * np.pi) + logdet + np.sum(z * z, axis=0))
    return out


def _m_step(x, resp, ridge):
    nk = resp.sum(axis=0)
    weights = nk / nk.sum()
    means = (resp.T @ x) / nk[:, None]
    d = x.shape[1]
    covs = np.empty((len(nk), d, d))
    for k in range(len(nk)):
        r = x - means[k]
        c = (resp[:, k, None] * r).T @ r / nk[k]
        covs[k] = 0.5 * (c + c.T) + ridge * np.eye(d)
    return means, covs, weights


def _seed_responsibilities(x, k, rng):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # empty clusters are handled by the floor below
        _, labels = kmeans2(x, k, minit="++", seed=rng)
    resp = np.full((x.shape[0], k), SEED_FLOOR)
    resp[np.arange(x.shape[0]), labels] = 1.0
    return resp / resp.sum(axis=1, keepdims=True)


def _run(x, k, rng, ridge, max_iter, tol) -> FitResult:
    resp = _seed_responsibilities(x, k, rng)
    history: list[float] = []
    converged = False
    for _ in range(max_iter):
        means, covs, weights = _m_step(x, resp, ridge)
        joint = _log_joint(x, means, covs, weights)
        norm = logsumexp(joint, axis=1)
        ll = float(norm.sum())
        resp = np.exp(joint - norm[:, None])
        if history and abs(ll - history[-1]) < tol * abs(ll):
            history.append(ll)
            converged = True
            break
        history.append(ll)
    means, covs, weights = _m_step(x, resp, ridge)
    try:
        mix = Mixture.from_arrays(means, covs, weights)
    except NotPositiveDefinite as exc:
        raise DegenerateFit(str(exc)) from None
    ll = float(logsumexp(_log_joint(x, means, covs, weights), axis=1).sum())
    return FitResult(mix, ll, history, converged)


def fit_em(data: DataMatrix | np.ndarray, k: int, n_seeds: int = 50, seed: int = 0,
           max_iter: int = 1000, tol: float = 1e-8) -> FitResult:
    """Best-of-``n_seeds`` EM fit with k-means++ starts and a small covariance ridge.

    The ridge is 1e-6 times the mean diagonal of the data covariance and is
    added at every M-step.  Ties in log-likelihood go to the earliest seed.
    """
    x = data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=float)
    if k < 1 or n_seeds < 1 or max_iter < 1 or tol <= 0:
        raise ValueError("k, n_seeds and max_iter must be positive and tol > 0")
    n, d = x.shape
    if n < k * (d + 1):
        raise TooFewRows(f"{n} rows cannot support {k} full-covariance components in {d} dimensions")
    ridge = RIDGE * float(np.mean(np.diag(np.atleast_2d(np.cov(x, rowvar=False)))))
    seeds = np.random.SeedSequence(seed).spawn(n_seeds)
    best: FitResult | None = None
    failures = 0
    for idx, ss in enumerate(seeds):
        try:
            res = _run(x, k, np.random.default_rng(ss), ridge, max_iter, tol)
        except DegenerateFit:
            failures += 1
            continue
        if best is None or res.log_likelihood > best.log_likelihood:
            best = FitResult(res.mixture, res.log_likelihood, res.history, res.converged, idx)
    if best is None:
        raise DegenerateFit("every EM start collapsed onto a singular component")
    if failures:
        log.info("%d of %d EM starts were degenerate", failures, n_seeds)
    return best
