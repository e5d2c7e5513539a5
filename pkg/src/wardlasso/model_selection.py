"""Seeded K-fold cross-validation over explicit parameter grids."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from .metrics import accuracy, explained_variance


@dataclass
class CVReport:
    n_folds: int
    grid: list[dict]
    mean_scores: np.ndarray
    fold_scores: np.ndarray
    best_index: int
    folds: list[np.ndarray] = field(repr=False)

    @property
    def best_params(self) -> dict:
        return dict(self.grid[self.best_index])

    def to_json(self) -> str:
        return json.dumps({
            "n_folds": self.n_folds,
            "grid": [{k: _plain(v) for k, v in g.items()} for g in self.grid],
            "mean_scores": [float(s) for s in self.mean_scores],
            "best_index": int(self.best_index),
            "best_params": {k: _plain(v) for k, v in self.best_params.items()},
        }, indent=2)


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, tuple):
        return list(v)
    return v


def fold_indices(n, n_folds=6, seed=0, y=None):
    """Test indices of each fold.

    Without ``y``: a seeded shuffle cut into contiguous blocks. With ``y``
    (classification): classes are shuffled separately, laid end to end and
    dealt round-robin, so every fold keeps the class proportions.
    """
    if n_folds < 2 or n < n_folds:
        raise ValueError(f"need 2 <= n_folds <= n, got n_folds={n_folds}, n={n}")
    rng = np.random.default_rng(seed)
    if y is None:
        return [np.sort(f) for f in np.array_split(rng.permutation(n), n_folds)]
    y = np.asarray(y)
    order = np.concatenate([rng.permutation(np.flatnonzero(y == c)) for c in np.unique(y)])
    slot = np.arange(n) % n_folds
    return [np.sort(order[slot == f]) for f in range(n_folds)]


def _tie_key(params):
    return (params.get("lam", 0.0), params.get("n_clusters", 0))


def cross_validate(estimator, X, y, param_grid, n_folds=6, seed=0, task="regression"):
    """Mean held-out score of ``estimator`` for every parameter set.

    Regression is scored by explained variance, classification by accuracy.
    The best mean score wins; exact ties go to the smallest ``lam``, then the
    smallest ``n_clusters``. Estimators exposing ``warm_start`` are refit in
    grid order with warm starts inside each fold.
    """
    param_grid = [dict(g) for g in param_grid]
    if not param_grid:
        raise ValueError("parameter grid is empty")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    n = X.shape[0]
    folds = fold_indices(n, n_folds, seed, y=y if task == "classification" else None)
    metric = accuracy if task == "classification" else explained_variance
    warm = "warm_start" in estimator.get_params()

    scores = np.empty((n_folds, len(param_grid)))
    for f, test in enumerate(folds):
        train = np.setdiff1d(np.arange(n), test, assume_unique=True)
        model = clone(estimator)
        if warm:
            model.set_params(warm_start=True)
        for g, params in enumerate(param_grid):
            if not warm:
                model = clone(estimator)
            model.set_params(**params)
            model.fit(X[train], y[train])
            scores[f, g] = metric(y[test], model.predict(X[test]))

    mean = scores.mean(axis=0)
    best = max(range(len(param_grid)),
               key=lambda g: (mean[g], tuple(-v for v in _tie_key(param_grid[g])), -g))
    return CVReport(n_folds=n_folds, grid=param_grid, mean_scores=mean,
                    fold_scores=scores, best_index=best, folds=folds)
