"""Convex sparse estimators and univariate screening.

Square-loss problems use the per-sample scaling

    (1 / (2 n)) ||y - X b||^2 + lam * (rho ||b||_1 + (1 - rho) / 2 ||b||^2)

so that a given ``lam`` means the same thing on a subsample as on the
full data. Regression fits take centered ``y`` and fit no intercept;
logistic fits use labels in {-1, +1} and an unpenalized intercept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _cd
from ._validation import check_binary, check_fraction, check_regression

F_SCORE_CAP = 1e12


@dataclass(frozen=True)
class CoefVector:
    beta: np.ndarray
    intercept: float = 0.0
    converged: bool = True
    n_iter: int = 0

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta)


def _check_penalty(lam, tol, max_iter):
    if not np.isfinite(lam) or lam < 0:
        raise ValueError(f"lam must be a finite non-negative number, got {lam}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")


def enet_cd(X, y, lam, rho=1.0, *, tol=1e-6, max_iter=1000, beta_init=None):
    """Elastic net by cyclic coordinate descent.

    Parameters
    ----------
    X : array of shape (n_samples, n_features)
        Standardized design.
    y : array of shape (n_samples,)
        Centered target.
    lam : float
        Overall penalty weight.
    rho : float in [0, 1]
        l1 share of the penalty; ``rho=1`` is the lasso.
    tol : float
        Bound on both the largest coefficient update of a sweep and the
        KKT residual at the returned point.
    max_iter : int
        Maximum number of full sweeps.
    beta_init : array of shape (n_features,), optional
        Warm start.

    Returns
    -------
    CoefVector
        ``converged`` is False when ``max_iter`` was reached.
    """
    X, y = check_regression(X, y)
    rho = check_fraction("rho", rho)
    _check_penalty(lam, tol, max_iter)
    p = X.shape[1]
    beta = np.zeros(p) if beta_init is None else np.array(beta_init, dtype=np.float64)
    if beta.shape != (p,):
        raise ValueError(f"beta_init must have shape ({p},)")
    n_iter, converged = _cd.enet_cd(
        np.asfortranarray(X), y, beta, lam * rho, lam * (1.0 - rho), tol, max_iter
    )
    return CoefVector(beta=beta, converged=bool(converged), n_iter=int(n_iter))


def lasso_cd(X, y, lam, *, tol=1e-6, max_iter=1000, beta_init=None):
    """Lasso by cyclic coordinate descent; see :func:`enet_cd`."""
    return enet_cd(X, y, lam, 1.0, tol=tol, max_iter=max_iter, beta_init=beta_init)


def enet_path(X, y, lams, rho=1.0, *, tol=1e-6, max_iter=1000):
    """Warm-started solutions along ``lams`` (in the order given).

    Returns an array of shape (len(lams), n_features).
    """
    X, y = check_regression(X, y)
    Xf = np.asfortranarray(X)
    beta = np.zeros(X.shape[1])
    coefs = np.empty((len(lams), X.shape[1]))
    for i, lam in enumerate(lams):
        _check_penalty(lam, tol, max_iter)
        _cd.enet_cd(Xf, y, beta, lam * rho, lam * (1.0 - rho), tol, max_iter)
        coefs[i] = beta
    return coefs


def enet_kkt_residual(X, y, beta, lam, rho=1.0):
    """Largest violation of the subgradient optimality conditions."""
    X, y = check_regression(X, y)
    beta = np.asarray(beta, dtype=np.float64)
    r = y - X @ beta
    return float(_cd.enet_kkt_residual(
        np.asfortranarray(X), r, beta, lam * rho, lam * (1.0 - rho)))


def enet_objective(X, y, beta, lam, rho=1.0):
    X = np.asarray(X, dtype=np.float64)
    r = np.asarray(y) - X @ beta
    return (
        0.5 * np.dot(r, r) / len(r)
        + lam * rho * np.abs(beta).sum()
        + 0.5 * lam * (1.0 - rho) * np.dot(beta, beta)
    )


def _logistic(X, y, lam1, lam2, tol, max_iter, beta_init, fit_intercept):
    X, y = check_binary(X, y)
    p = X.shape[1]
    beta = np.zeros(p) if beta_init is None else np.array(beta_init, dtype=np.float64)
    if beta.shape != (p,):
        raise ValueError(f"beta_init must have shape ({p},)")
    b0 = 0.0
    if fit_intercept:
        n_pos = np.sum(y > 0)
        b0 = float(np.log(n_pos / (len(y) - n_pos)))
    b, n_iter, converged = _cd.logistic_cd(
        np.asfortranarray(X), y, beta, b0, lam1, lam2, tol, max_iter, fit_intercept
    )
    return CoefVector(beta=beta, intercept=float(b), converged=bool(converged),
                      n_iter=int(n_iter))


def logistic_l1(X, y, lam, *, tol=1e-6, max_iter=100, beta_init=None,
                fit_intercept=True):
    """l1-penalized logistic regression.

    Minimizes ``mean(log(1 + exp(-y (X b + b0)))) + lam ||b||_1`` with an
    unpenalized intercept ``b0``. Labels are mapped to {-1, +1}.
    """
    _check_penalty(lam, tol, max_iter)
    return _logistic(X, y, lam, 0.0, tol, max_iter, beta_init, fit_intercept)


def logistic_l2(X, y, lam, *, tol=1e-6, max_iter=100, beta_init=None,
                fit_intercept=True):
    """Ridge-penalized logistic regression, penalty ``lam / 2 ||b||^2``."""
    _check_penalty(lam, tol, max_iter)
    return _logistic(X, y, 0.0, lam, tol, max_iter, beta_init, fit_intercept)


def logistic_objective(X, y, beta, intercept, lam, penalty="l1"):
    X, y = check_binary(X, y)
    beta = np.asarray(beta, dtype=np.float64)
    eta = X @ beta + intercept
    loss = np.mean(np.logaddexp(0.0, -y * eta))
    if penalty == "l1":
        return loss + lam * np.abs(beta).sum()
    return loss + 0.5 * lam * np.dot(beta, beta)


def logistic_gradient(X, y, beta, intercept, lam=0.0, penalty="l1"):
    """Gradient of :func:`logistic_objective` w.r.t. (beta, intercept).

    For ``penalty="l1"`` the penalty contributes ``lam * sign(beta)``,
    which is only a gradient away from zero coordinates.
    """
    X, y = check_binary(X, y)
    beta = np.asarray(beta, dtype=np.float64)
    eta = X @ beta + intercept
    g = -y * _expit(-y * eta) / len(y)
    gbeta = X.T @ g
    if penalty == "l1":
        gbeta = gbeta + lam * np.sign(beta)
    else:
        gbeta = gbeta + lam * beta
    return gbeta, float(g.sum())


def logistic_kkt_residual(X, y, coef: CoefVector, lam, penalty="l1"):
    X, y = check_binary(X, y)
    lam1, lam2 = (lam, 0.0) if penalty == "l1" else (0.0, lam)
    return float(_cd.logistic_kkt_residual(
        np.asfortranarray(X), y, coef.beta, coef.intercept, lam1, lam2, True))


def _expit(t):
    return 0.5 * (1.0 + np.tanh(0.5 * t))


def lambda_max(X, y, loss="square"):
    """Smallest l1 penalty at which the null model is optimal.

    For the square loss this is ``max_j |x_j^T y| / n`` (``y`` centered).
    For the logistic loss it is the largest absolute loss gradient at the
    intercept-only model.
    """
    if loss == "square":
        X, y = check_regression(X, y)
        return float(np.max(np.abs(X.T @ y)) / X.shape[0])
    if loss == "logistic":
        X, y = check_binary(X, y)
        t = (y + 1.0) / 2.0
        return float(np.max(np.abs(X.T @ (t - t.mean()))) / X.shape[0])
    raise ValueError(f"unknown loss {loss!r}")


def lambda_grid(X, y, loss="square", n_lambdas=15, ratio=1e-3):
    """Log-spaced penalties from ``lambda_max`` down to ``ratio * lambda_max``."""
    lmax = lambda_max(X, y, loss=loss)
    return np.geomspace(lmax, lmax * ratio, n_lambdas)


def univariate_f_scores(X, y, task="regression"):
    """Univariate F statistics, one per column.

    Regression uses ``(n - 2) r^2 / (1 - r^2)`` with ``r`` the Pearson
    correlation; classification uses the one-way ANOVA F. Zero-variance
    columns score 0; perfect fits are capped at ``F_SCORE_CAP``.
    """
    if task == "regression":
        X, y = check_regression(X, y, min_samples=3)
        n = X.shape[0]
        Xc = X - X.mean(axis=0)
        yc = y - y.mean()
        sxx = np.einsum("ij,ij->j", Xc, Xc)
        syy = float(yc @ yc)
        sxy = Xc.T @ yc
        ok = (sxx > 0) & (syy > 0)
        r2 = np.zeros(X.shape[1])
        r2[ok] = np.clip(sxy[ok] ** 2 / (sxx[ok] * syy), 0.0, 1.0)
        resid = 1.0 - r2
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(resid > 0, (n - 2) * r2 / resid, F_SCORE_CAP)
        f = np.minimum(f, F_SCORE_CAP)
        f[~ok] = 0.0
        return f
    if task == "classification":
        X = check_regression(X, np.zeros(len(X)), min_samples=3)[0]
        y = np.asarray(y)
        if y.shape != (X.shape[0],):
            raise ValueError("y must be 1D and match X")
        classes = np.unique(y)
        n, k = X.shape[0], len(classes)
        if k < 2:
            raise ValueError("classification needs at least two classes")
        grand = X.mean(axis=0)
        ssb = np.zeros(X.shape[1])
        ssw = np.zeros(X.shape[1])
        for c in classes:
            Xk = X[y == c]
            mk = Xk.mean(axis=0)
            ssb += len(Xk) * (mk - grand) ** 2
            ssw += ((Xk - mk) ** 2).sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(
                ssw > 0, (ssb / (k - 1)) / (ssw / (n - k)), F_SCORE_CAP)
        f = np.minimum(f, F_SCORE_CAP)
        f[ssb <= 0] = 0.0
        return f
    raise ValueError(f"unknown task {task!r}")
