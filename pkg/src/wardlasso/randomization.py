"""Stability selection: randomized lasso and randomized ward lasso."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary, check_fraction, check_regression
from .core import (
    ConstantColumnWarning,
    Partition,
    SpatialGrid,
    StabilityScores,
    build_grid_adjacency,
    reduce_by_partition,
    standardize_columns,
)
from .solvers import lasso_cd, logistic_l1
from .ward import ward_partition


class ClusterSource(str, Enum):
    """What the clustering step of each repetition is computed from."""

    RANDOMIZED = "randomized"
    FIXED = "fixed-on-full-data"
    RANDOM_IID = "random-iid-signal"


@dataclass(frozen=True)
class RandomizationConfig:
    lam: float
    alpha: float = 0.5
    pi: float = 0.75
    n_resampling: int = 200
    q: int | None = None
    seed: int = 0
    loss: str = "square"

    def __post_init__(self):
        check_fraction("alpha", self.alpha)
        check_fraction("pi", self.pi, low_open=True)
        if self.n_resampling < 1:
            raise ValueError("n_resampling must be >= 1")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.loss not in ("square", "logistic"):
            raise ValueError(f"unknown loss {self.loss!r}")


def repetition_rngs(seed, i):
    """Independent generators for (subsampling, rescaling, clustering) of
    repetition ``i``; depends only on ``(seed, i)``."""
    children = np.random.SeedSequence([int(seed), int(i)]).spawn(3)
    return tuple(np.random.default_rng(c) for c in children)


def subsample(X, y, pi, rng, stratify=False):
    """Draw ``floor(pi * n)`` distinct rows uniformly without replacement.

    With ``stratify=True`` the draw is split across the classes of ``y``
    in proportion to their sizes (largest-remainder rounding).

    Returns the subsampled ``(X, y)`` and the row indices.
    """
    pi = check_fraction("pi", pi, low_open=True)
    X = np.asarray(X)
    y = np.asarray(y)
    n = X.shape[0]
    m = int(np.floor(pi * n))
    if m < 2:
        raise ValueError(f"subsample of size {m} is too small (n={n}, pi={pi})")
    if not stratify:
        idx = rng.permutation(n)[:m]
        return X[idx], y[idx], idx
    classes, counts = np.unique(y, return_counts=True)
    quota = counts * m / n
    take = np.floor(quota).astype(int)
    short = m - take.sum()
    if short:
        order = np.argsort(-(quota - take), kind="stable")
        take[order[:short]] += 1
    if np.any(take == 0):
        raise ValueError("stratified subsample lost a class")
    parts = [rng.permutation(np.flatnonzero(y == c))[:t] for c, t in zip(classes, take)]
    idx = rng.permutation(np.concatenate(parts))
    return X[idx], y[idx], idx


def random_rescale(X, alpha, rng):
    """Multiply each column by 1 or ``1 - alpha`` with equal probability.

    Returns the rescaled matrix and the weights.
    """
    alpha = check_fraction("alpha", alpha)
    X = np.asarray(X, dtype=np.float64)
    w = 1.0 - alpha * rng.integers(0, 2, size=X.shape[1])
    return X * w, w


def cluster_scales(Z, partition: Partition):
    """Standard deviation of each cluster-mean column of the standardized
    design ``Z``; singleton clusters (already unit variance) get 1."""
    scales = np.ones(partition.q)
    multi = partition.sizes > 1
    if np.any(multi):
        Z_red = reduce_by_partition(Z, partition)[:, multi]
        sd = np.sqrt(np.mean((Z_red - Z_red.mean(axis=0)) ** 2, axis=0))
        sd[sd <= 0] = 1.0
        scales[multi] = sd
    return scales


def reduced_design(X, partition: Partition, scales):
    """Cluster means of ``X`` divided by the per-cluster ``scales``."""
    X_red = reduce_by_partition(X, partition)
    multi = partition.sizes > 1
    X_red[:, multi] /= scales[multi]
    return X_red


def _one_repetition(X, y, cfg: RandomizationConfig, i, grid, source, fixed):
    try:
        return _repetition_mask(X, y, cfg, i, grid, source, fixed)
    except ValueError as exc:
        raise ValueError(f"repetition {i} rejected its input: {exc}") from exc


def _repetition_mask(X, y, cfg, i, grid, source, fixed):
    rng_sub, rng_scale, rng_clust = repetition_rngs(cfg.seed, i)
    logistic = cfg.loss == "logistic"
    Xs, ys, _ = subsample(X, y, cfg.pi, rng_sub, stratify=logistic)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConstantColumnWarning)
        Z, _, _ = standardize_columns(Xs)
    Xw, _ = random_rescale(Z, cfg.alpha, rng_scale)

    partition = None
    if source is not None:
        if source is ClusterSource.RANDOMIZED:
            partition = ward_partition(Xw, grid, cfg.q)
        elif source is ClusterSource.FIXED:
            partition = fixed
        else:
            noise = rng_clust.standard_normal(Xw.shape)
            partition = ward_partition(noise, grid, cfg.q)
        design = reduced_design(Xw, partition, cluster_scales(Z, partition))
    else:
        design = Xw

    if logistic:
        coef = logistic_l1(design, ys, cfg.lam)
    else:
        coef = lasso_cd(design, ys - ys.mean(), cfg.lam)
    selected = coef.beta != 0
    if partition is not None:
        selected = selected[partition.labels]
    return selected


def _run(X, y, cfg, grid, source, fixed, n_jobs):
    if n_jobs == 1:
        masks = [_one_repetition(X, y, cfg, i, grid, source, fixed)
                 for i in range(cfg.n_resampling)]
    else:
        masks = Parallel(n_jobs=n_jobs)(
            delayed(_one_repetition)(X, y, cfg, i, grid, source, fixed)
            for i in range(cfg.n_resampling)
        )
    counts = np.zeros(X.shape[1], dtype=np.int64)
    for m in masks:
        counts += m
    return StabilityScores(counts=counts, n_resampling=cfg.n_resampling)


def _check_xy(X, y, loss):
    if loss == "logistic":
        return check_binary(X, y)
    return check_regression(X, y)


def randomized_lasso(X, y, cfg: RandomizationConfig, n_jobs=1) -> StabilityScores:
    """Selection frequencies of the lasso (or l1-logistic) over
    ``cfg.n_resampling`` subsampled and randomly rescaled designs."""
    X, y = _check_xy(X, y, cfg.loss)
    return _run(X, y, cfg, None, None, None, n_jobs)


def randomized_ward_lasso(X, y, grid: SpatialGrid, cfg: RandomizationConfig,
                          source=ClusterSource.RANDOMIZED, n_jobs=1) -> StabilityScores:
    """Randomized ward lasso.

    Each repetition subsamples rows, rescales columns, clusters the features
    into ``cfg.q`` connected regions, fits the sparse model on the cluster
    means and marks every member of a selected cluster. ``source`` chooses
    the data the clustering is computed from.
    """
    X, y = _check_xy(X, y, cfg.loss)
    source = ClusterSource(source)
    p = X.shape[1]
    if grid.n_nodes != p:
        raise ValueError(f"grid has {grid.n_nodes} nodes but X has {p} columns")
    if cfg.q is None or not 1 <= cfg.q <= p:
        raise ValueError(f"q must lie in [1, {p}], got {cfg.q}")
    fixed = None
    if source is ClusterSource.FIXED:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConstantColumnWarning)
            Z, _, _ = standardize_columns(X)
        fixed = ward_partition(Z, grid, cfg.q)
    return _run(X, y, cfg, grid, source, fixed, n_jobs)


def stability_support(scores, tau):
    """Indices of features whose stability score is at least ``tau``."""
    a = scores.a if isinstance(scores, StabilityScores) else np.asarray(scores)
    return np.flatnonzero(a >= tau)


class RandomizedLasso(SelectorMixin, BaseEstimator):
    """Stability selection with the randomized lasso.

    Parameters
    ----------
    lam : float
        Penalty of each sparse fit.
    scaling : float
        Columns are multiplied by ``1 - scaling`` with probability 1/2.
    sample_fraction : float
        Fraction of rows kept per repetition.
    n_resampling : int
    threshold : float
        Features with score >= threshold are selected by ``transform``.
    loss : {"square", "logistic"}
    random_state : int
    n_jobs : int
        Parallel workers; scores do not depend on it.
    """

    def __init__(self, lam=0.1, scaling=0.5, sample_fraction=0.75,
                 n_resampling=200, threshold=0.5, loss="square",
                 random_state=0, n_jobs=1):
        self.lam = lam
        self.scaling = scaling
        self.sample_fraction = sample_fraction
        self.n_resampling = n_resampling
        self.threshold = threshold
        self.loss = loss
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self, q=None):
        return RandomizationConfig(
            lam=self.lam, alpha=self.scaling, pi=self.sample_fraction,
            n_resampling=self.n_resampling, q=q, seed=self.random_state,
            loss=self.loss)

    def fit(self, X, y):
        self.stability_ = randomized_lasso(X, y, self._config(), n_jobs=self.n_jobs)
        self.scores_ = self.stability_.a
        self.n_features_in_ = len(self.scores_)
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "scores_")
        return self.scores_ >= self.threshold


class RandomizedWardLasso(RandomizedLasso):
    """Randomized lasso on per-repetition spatially-constrained Ward
    clusters; see :func:`randomized_ward_lasso`.

    Parameters
    ----------
    n_clusters : int
    dims : tuple of int
        Feature grid shape.
    cluster_source : {"randomized", "fixed-on-full-data", "random-iid-signal"}
    """

    def __init__(self, lam=0.1, n_clusters=128, dims=(32, 64), scaling=0.5,
                 sample_fraction=0.75, n_resampling=200, threshold=0.5,
                 loss="square", cluster_source="randomized", random_state=0,
                 n_jobs=1):
        super().__init__(lam=lam, scaling=scaling, sample_fraction=sample_fraction,
                         n_resampling=n_resampling, threshold=threshold,
                         loss=loss, random_state=random_state, n_jobs=n_jobs)
        self.n_clusters = n_clusters
        self.dims = dims
        self.cluster_source = cluster_source

    def fit(self, X, y):
        grid = build_grid_adjacency(self.dims)
        self.stability_ = randomized_ward_lasso(
            X, y, grid, self._config(q=self.n_clusters),
            source=self.cluster_source, n_jobs=self.n_jobs)
        self.scores_ = self.stability_.a
        self.n_features_in_ = len(self.scores_)
        return self
