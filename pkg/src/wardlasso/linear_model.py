"""scikit-learn style estimators over the coordinate-descent solvers."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary, check_design, check_regression
from .core import ConstantColumnWarning, build_grid_adjacency, standardize_columns
from .randomization import cluster_scales, reduced_design
from .solvers import enet_cd, logistic_l1, logistic_l2
from .ward import ward_partition


class ElasticNetCD(RegressorMixin, BaseEstimator):
    """Elastic net fitted by coordinate descent on centered data.

    Minimizes ``(1/2n)||y - Xb||^2 + lam (rho ||b||_1 + (1-rho)/2 ||b||^2)``
    after centering ``X`` and ``y``; the intercept is recovered from the
    means. With ``warm_start=True`` the previous ``coef_`` seeds the next fit.
    """

    def __init__(self, lam=1.0, rho=0.5, tol=1e-6, max_iter=1000, warm_start=False):
        self.lam = lam
        self.rho = rho
        self.tol = tol
        self.max_iter = max_iter
        self.warm_start = warm_start

    def fit(self, X, y):
        X, y = check_regression(X, y)
        x_mean, y_mean = X.mean(axis=0), y.mean()
        init = None
        if self.warm_start and getattr(self, "coef_", None) is not None \
                and self.coef_.shape == (X.shape[1],):
            init = self.coef_
        res = enet_cd(X - x_mean, y - y_mean, self.lam, self.rho, tol=self.tol,
                      max_iter=self.max_iter, beta_init=init)
        self.coef_ = res.beta
        self.intercept_ = float(y_mean - x_mean @ res.beta)
        self.converged_ = res.converged
        self.n_iter_ = res.n_iter
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return check_design(X, min_samples=1) @ self.coef_ + self.intercept_


class LassoCD(ElasticNetCD):
    """Lasso: :class:`ElasticNetCD` with ``rho=1``."""

    def __init__(self, lam=1.0, tol=1e-6, max_iter=1000, warm_start=False):
        super().__init__(lam=lam, rho=1.0, tol=tol, max_iter=max_iter,
                         warm_start=warm_start)


class LogisticCD(ClassifierMixin, BaseEstimator):
    """Penalized logistic regression with an unpenalized intercept.

    Parameters
    ----------
    lam : float
    penalty : {"l1", "l2"}
        ``lam ||b||_1`` or ``lam / 2 ||b||^2``.
    """

    def __init__(self, lam=1.0, penalty="l1", tol=1e-6, max_iter=100, warm_start=False):
        self.lam = lam
        self.penalty = penalty
        self.tol = tol
        self.max_iter = max_iter
        self.warm_start = warm_start

    def fit(self, X, y):
        self.classes_ = np.unique(y)
        X, ys = check_binary(X, y)
        solver = {"l1": logistic_l1, "l2": logistic_l2}.get(self.penalty)
        if solver is None:
            raise ValueError(f"unknown penalty {self.penalty!r}")
        init = None
        if self.warm_start and getattr(self, "coef_", None) is not None \
                and self.coef_.shape == (X.shape[1],):
            init = self.coef_
        res = solver(X, ys, self.lam, tol=self.tol, max_iter=self.max_iter,
                     beta_init=init)
        self.coef_ = res.beta
        self.intercept_ = res.intercept
        self.converged_ = res.converged
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        return check_design(X, min_samples=1) @ self.coef_ + self.intercept_

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0).astype(int)]


class WardLasso(BaseEstimator):
    """Single (non-randomized) ward + sparse fit, usable as a predictor.

    Standardizes ``X``, clusters features with constrained Ward into
    ``n_clusters`` regions, fits the lasso (``loss="square"``) or
    l1-logistic (``loss="logistic"``) on the rescaled cluster means.
    This is the predictive surrogate used to cross-validate the randomized
    ward lasso.

    With ``warm_start=True`` the clustering of the last training matrix is
    reused when the next ``fit`` sees the same data and ``n_clusters``.
    """

    def __init__(self, lam=0.1, n_clusters=128, dims=(32, 64), loss="square",
                 warm_start=False):
        self.lam = lam
        self.n_clusters = n_clusters
        self.dims = dims
        self.loss = loss
        self.warm_start = warm_start

    def _partition(self, Z):
        cache = getattr(self, "_cache", None)
        if self.warm_start and cache is not None:
            Z_prev, q_prev, part = cache
            if q_prev == self.n_clusters and Z_prev.shape == Z.shape \
                    and np.array_equal(Z_prev, Z):
                return part
        part = ward_partition(Z, build_grid_adjacency(self.dims), int(self.n_clusters))
        self._cache = (Z, self.n_clusters, part)
        return part

    def fit(self, X, y):
        if self.loss == "logistic":
            self.classes_ = np.unique(y)
            X, y = check_binary(X, y)
        else:
            X, y = check_regression(X, y)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConstantColumnWarning)
            Z, self.mean_, self.scale_ = standardize_columns(X)
        self.partition_ = self._partition(Z)
        self.cluster_scales_ = cluster_scales(Z, self.partition_)
        design = reduced_design(Z, self.partition_, self.cluster_scales_)
        init = None
        prev = getattr(self, "coef_reduced_", None)
        if self.warm_start and prev is not None and prev.shape == (self.partition_.q,):
            init = prev
        if self.loss == "logistic":
            res = logistic_l1(design, y, self.lam, beta_init=init)
        else:
            self.y_mean_ = float(y.mean())
            res = enet_cd(design, y - self.y_mean_, self.lam, 1.0, beta_init=init)
        self.coef_reduced_ = res.beta
        self.intercept_ = res.intercept
        self.coef_ = self.coef_reduced_[self.partition_.labels]
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_reduced_")
        X = check_design(X, min_samples=1)
        Z = (X - self.mean_) / self.scale_
        design = reduced_design(Z, self.partition_, self.cluster_scales_)
        out = design @ self.coef_reduced_ + self.intercept_
        if self.loss != "logistic":
            out = out + self.y_mean_
        return out

    def predict(self, X):
        out = self.decision_function(X)
        if self.loss == "logistic":
            return self.classes_[(out > 0).astype(int)]
        return out
