"""Scikit-learn style estimators wrapping the whitening and sparse NMF
primitives, so they compose with pipelines and model selection."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .identify import build_model as _build_model
from .identify import identify as _identify_signal
from .signals import Ensemble, Signal
from .snmf import SolverConfig, fit_nmf, solve_activations
from .whitening import DEFAULT_EIG_FLOOR, Moments, whiten, whitening_matrix


class Whitener(TransformerMixin, BaseEstimator):
    """Decorrelating linear transform fit on (n_samples, n_features) data.

    Parameters
    ----------
    method : one of "pca", "zca", "pca-cor", "zca-cor"
    eig_floor : relative eigenvalue clamp applied before inversion
    """

    def __init__(self, method="zca", eig_floor=DEFAULT_EIG_FLOOR):
        self.method = method
        self.eig_floor = eig_floor

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if X.shape[0] < 2:
            raise ValueError("need at least 2 samples to fit a Whitener")
        cov = np.atleast_2d(np.cov(X, rowvar=False, ddof=1))
        cov = 0.5 * (cov + cov.T)
        moments = Moments(mean=X.mean(axis=0), cov=cov, n_obs=X.shape[0])
        self.model_ = whitening_matrix(self.method, moments, self.eig_floor)
        self.mean_ = moments.mean
        self.components_ = self.model_.matrix
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.mean_.size:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.mean_.size}")
        return (X - self.mean_) @ self.components_.T


class SparseNMF(TransformerMixin, BaseEstimator):
    """Sparse NMF with beta-divergence multiplicative updates.

    fit learns unit-norm components from X >= 0; transform solves sparse
    activations with the components fixed.
    """

    def __init__(self, n_components=2, beta=1.0, sparsity=0.1, max_iter=500,
                 tol=1e-6, random_state=0):
        self.n_components = n_components
        self.beta = beta
        self.sparsity = sparsity
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def _config(self):
        return SolverConfig(beta=self.beta, sparsity=self.sparsity,
                            max_iters=self.max_iter, rel_tol=self.tol)

    def fit(self, X, y=None):
        self.fit_transform(X)
        return self

    def fit_transform(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if np.any(X < 0):
            raise ValueError("SparseNMF requires non-negative input")
        w, h, trace = fit_nmf(X.T, self.n_components, self._config(),
                              seed=self.random_state)
        self.components_ = w.T
        self.n_features_in_ = X.shape[1]
        self.objective_trace_ = trace
        return h.T

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X, dtype=np.float64)
        if np.any(X < 0):
            raise ValueError("SparseNMF requires non-negative input")
        h, _ = solve_activations(X.T, self.components_.T, self._config())
        return h.T

    def inverse_transform(self, H):
        check_is_fitted(self, "components_")
        return np.asarray(H) @ self.components_


class BuriedObjectClassifier(ClassifierMixin, BaseEstimator):
    """Dictionary classifier: whitened references as atoms, sparse
    activations as scores.

    X rows are traces (n_signals, n_times); y holds class labels.
    """

    def __init__(self, method="zca", use_whitening=True, beta=1.0,
                 sparsity=0.1, max_iter=500, tol=1e-6,
                 eig_floor=DEFAULT_EIG_FLOOR, dt=1.0):
        self.method = method
        self.use_whitening = use_whitening
        self.beta = beta
        self.sparsity = sparsity
        self.max_iter = max_iter
        self.tol = tol
        self.eig_floor = eig_floor
        self.dt = dt

    def fit(self, X, y):
        X = check_array(X, dtype=np.float64)
        y = np.asarray(y)
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y length mismatch")
        refs = Ensemble([
            Signal(id=f"ref{i}", label=str(lab), samples=row, dt=self.dt)
            for i, (row, lab) in enumerate(zip(X, y))])
        solver = SolverConfig(beta=self.beta, sparsity=self.sparsity,
                              max_iters=self.max_iter, rel_tol=self.tol)
        self.model_ = _build_model(refs, self.method, solver, self.eig_floor)
        self.classes_ = np.unique(y.astype(str))
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        out = []
        for i, row in enumerate(X):
            q = Signal(id=f"query{i}", label="", samples=row, dt=self.dt)
            out.append(_identify_signal(
                q, self.model_, use_whitening=self.use_whitening).winner)
        return np.asarray(out)
