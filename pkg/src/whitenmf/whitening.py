"""Covariance estimation, symmetric eigendecomposition, and the four
whitening transforms (PCA, ZCA, PCA-cor, ZCA-cor) with diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import Ensemble, Signal

PCA = "pca"
ZCA = "zca"
PCA_COR = "pca-cor"
ZCA_COR = "zca-cor"
METHODS = (PCA, ZCA, PCA_COR, ZCA_COR)

DEFAULT_EIG_FLOOR = 1e-10


class DegenerateCovarianceError(ValueError):
    """Covariance has no usable eigenvalue mass; whitening is undefined."""


@dataclass(frozen=True)
class Moments:
    mean: np.ndarray        # length d
    cov: np.ndarray         # d x d symmetric
    n_obs: int

    @property
    def d(self):
        return self.mean.size


@dataclass(frozen=True)
class EigenPair:
    vectors: np.ndarray     # d x d, columns orthonormal
    values: np.ndarray      # length d, nonincreasing


@dataclass(frozen=True)
class CorrelationDecomp:
    variances: np.ndarray   # diagonal of the covariance
    corr: np.ndarray        # correlation matrix
    vectors: np.ndarray     # eigenvectors of corr
    values: np.ndarray      # eigenvalues of corr, nonincreasing


@dataclass(frozen=True)
class WhiteningModel:
    method: str
    moments: Moments
    eig: EigenPair
    corr: CorrelationDecomp | None
    matrix: np.ndarray      # d x d whitening matrix
    eig_floor: float


def estimate_moments(e: Ensemble) -> Moments:
    """Per-signal means and unbiased sample covariance over time samples."""
    if e.n < 2:
        raise ValueError("need at least 2 time samples to estimate moments")
    x = e.matrix()
    mean = x.mean(axis=1)
    cov = np.atleast_2d(np.cov(x, ddof=1))
    cov = 0.5 * (cov + cov.T)
    return Moments(mean=mean, cov=cov, n_obs=e.n)


def sym_eig(sigma) -> EigenPair:
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues are sorted descending; each eigenvector is flipped so its
    largest-magnitude entry (first on ties) is positive.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("input must be a square matrix")
    scale = np.linalg.norm(sigma)
    if scale > 0 and np.linalg.norm(sigma - sigma.T) > 1e-10 * scale:
        raise ValueError("input matrix is not symmetric")
    values, vectors = np.linalg.eigh(0.5 * (sigma + sigma.T))
    # stable descending sort keeps the natural order of tied eigenvalues
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    for j in range(vectors.shape[1]):
        k = np.argmax(np.abs(vectors[:, j]))
        if vectors[k, j] < 0:
            vectors[:, j] = -vectors[:, j]
    return EigenPair(vectors=vectors, values=values)


def _floored_inv_sqrt(values, eig_floor, what):
    vmax = np.max(values)
    if vmax <= 0:
        raise DegenerateCovarianceError(
            f"{what} has no positive eigenvalue mass")
    return 1.0 / np.sqrt(np.maximum(values, eig_floor * vmax))


def whitening_matrix(method: str, moments: Moments,
                     eig_floor: float = DEFAULT_EIG_FLOOR) -> WhiteningModel:
    """Build the whitening matrix of the requested method.

    Eigenvalues are clamped below at eig_floor times the largest eigenvalue
    before inversion, so near-singular ensembles whiten without blow-up.
    """
    if method not in METHODS:
        raise ValueError(f"unknown whitening method {method!r}")
    if not eig_floor > 0:
        raise ValueError("eig_floor must be positive")
    eig = sym_eig(moments.cov)
    corr = None
    if method == PCA:
        inv = _floored_inv_sqrt(eig.values, eig_floor, "covariance")
        wt = inv[:, None] * eig.vectors.T
    elif method == ZCA:
        inv = _floored_inv_sqrt(eig.values, eig_floor, "covariance")
        wt = eig.vectors @ (inv[:, None] * eig.vectors.T)
    else:
        variances = np.diag(moments.cov).copy()
        vinv = _floored_inv_sqrt(variances, eig_floor, "variance vector")
        p = vinv[:, None] * moments.cov * vinv[None, :]
        p = 0.5 * (p + p.T)
        peig = sym_eig(p)
        pinv = _floored_inv_sqrt(peig.values, eig_floor, "correlation")
        corr = CorrelationDecomp(variances=variances, corr=p,
                                 vectors=peig.vectors, values=peig.values)
        if method == ZCA_COR:
            wt = (peig.vectors @ (pinv[:, None] * peig.vectors.T)) \
                * vinv[None, :]
        else:  # PCA_COR
            wt = (pinv[:, None] * peig.vectors.T) * vinv[None, :]
    return WhiteningModel(method=method, moments=moments, eig=eig,
                          corr=corr, matrix=wt, eig_floor=eig_floor)


def whiten(e: Ensemble, model: WhiteningModel) -> Ensemble:
    """Apply Z = Wt (X - mean); labels, ids and dt are preserved."""
    if e.d != model.moments.d:
        raise ValueError(
            f"ensemble has d={e.d}, model expects d={model.moments.d}")
    x = e.matrix()
    z = model.matrix @ (x - model.moments.mean[:, None])
    return Ensemble([Signal(id=s.id, label=s.label, samples=z[i], dt=s.dt)
                     for i, s in enumerate(e.signals)])


def diagonality(sigma) -> float:
    """Off-diagonal energy fraction: ||offdiag||_F^2 / ||sigma||_F^2."""
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("input must be a square matrix")
    total = float(np.sum(sigma ** 2))
    if total == 0:
        return 0.0
    on = float(np.sum(np.diag(sigma) ** 2))
    return max(0.0, (total - on) / total)


def cross_correlation(original: Ensemble, processed: Ensemble) -> np.ndarray:
    """Pearson correlation of each original signal with each processed one."""
    if original.d != processed.d or original.n != processed.n:
        raise ValueError("ensembles must share d and n")
    a = original.matrix()
    b = processed.matrix()
    for e in (original, processed):
        for s in e.signals:
            if np.ptp(s.samples) == 0:
                raise ValueError(
                    f"signal {s.id!r} is constant; correlation undefined")
    a = a - a.mean(axis=1, keepdims=True)
    b = b - b.mean(axis=1, keepdims=True)
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    return np.clip(a @ b.T, -1.0, 1.0)
