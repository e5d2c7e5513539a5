"""Spatially-constrained Ward agglomeration of features."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_design
from ._ward import ward_merges
from .core import Partition, SpatialGrid, backproject, build_grid_adjacency, reduce_by_partition


@dataclass(frozen=True)
class MergeTree:
    """Sequence of agglomerations over ``n_leaves`` features.

    Merge ``t`` joins clusters ``children[t]`` into the new cluster
    ``n_leaves + t``. ``raw_heights`` are the Ward costs as computed;
    ``heights`` is their running maximum (constrained Ward can produce
    inversions). Cutting uses merge order only.
    """

    n_leaves: int
    children: np.ndarray
    raw_heights: np.ndarray

    @property
    def n_merges(self) -> int:
        return len(self.children)

    @property
    def heights(self) -> np.ndarray:
        return np.maximum.accumulate(self.raw_heights) if self.n_merges else self.raw_heights

    def to_json(self) -> str:
        merges = [
            {"a": int(a), "b": int(b), "height": float(h), "id": self.n_leaves + t}
            for t, ((a, b), h) in enumerate(zip(self.children, self.heights))
        ]
        return json.dumps({"n_leaves": self.n_leaves, "merges": merges})


def ward_tree(X, grid: SpatialGrid, n_clusters: int = 1) -> MergeTree:
    """Agglomerate the columns of ``X`` until ``n_clusters`` remain.

    Only clusters adjacent in the contracted grid graph may merge. The merge
    cost of clusters A, B is the increase in within-cluster sum of squares,
    ``|A||B| / (|A| + |B|) * ||mean_A - mean_B||^2``. Ties are broken on the
    smallest (min id, max id) pair.
    """
    X = check_design(X, min_samples=1)
    n, p = X.shape
    if p != grid.n_nodes:
        raise ValueError(f"X has {p} columns but the grid has {grid.n_nodes} nodes")
    if not 1 <= n_clusters <= p:
        raise ValueError(f"n_clusters must lie in [1, {p}], got {n_clusters}")

    n_merges = p - n_clusters
    children, raw_heights, done = ward_merges(np.ascontiguousarray(X.T), grid.edges, n_merges)
    if done < n_merges:
        raise ValueError("connectivity graph is disconnected; cannot reach "
                         f"{n_clusters} clusters")
    return MergeTree(n_leaves=p, children=children, raw_heights=raw_heights)


def ward_cluster(X, grid: SpatialGrid) -> MergeTree:
    """Full constrained Ward tree (``p - 1`` merges for a connected grid)."""
    return ward_tree(X, grid, n_clusters=1)


def cut_tree(tree: MergeTree, q: int) -> Partition:
    """Partition obtained by applying only the first ``p - q`` merges.

    Cluster labels are numbered by their smallest member feature.
    """
    p = tree.n_leaves
    if not 1 <= q <= p:
        raise ValueError(f"q must lie in [1, {p}], got {q}")
    used = p - q
    if used > tree.n_merges:
        raise ValueError(f"tree holds {tree.n_merges} merges, cannot cut at q={q}")
    owner = np.arange(p + used)
    for t in range(used - 1, -1, -1):
        a, b = tree.children[t]
        owner[a] = owner[b] = owner[p + t]
    roots = owner[:p]
    _, first, inverse = np.unique(roots, return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first, kind="stable"), kind="stable")
    return Partition(rank[inverse].astype(np.int64))


def ward_partition(X, grid: SpatialGrid, q: int) -> Partition:
    """Constrained Ward clustering stopped as soon as ``q`` clusters remain."""
    if q == grid.n_nodes:
        return Partition.singletons(q)
    return cut_tree(ward_tree(X, grid, n_clusters=q), q)


class WardAgglomeration(TransformerMixin, BaseEstimator):
    """Feature agglomeration with spatially-constrained Ward linkage.

    Parameters
    ----------
    n_clusters : int
        Number of connected clusters to keep.
    dims : tuple of int
        Grid shape ``(rows, cols)``; ``rows * cols`` must equal the number
        of features.

    Attributes
    ----------
    partition_ : Partition
    labels_ : ndarray of shape (n_features,)
    """

    def __init__(self, n_clusters=2, dims=(32, 64)):
        self.n_clusters = n_clusters
        self.dims = dims

    def fit(self, X, y=None):
        X = check_design(X)
        grid = build_grid_adjacency(self.dims)
        self.partition_ = ward_partition(X, grid, int(self.n_clusters))
        self.labels_ = np.asarray(self.partition_.labels)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "partition_")
        return reduce_by_partition(check_design(X, min_samples=1), self.partition_)

    def inverse_transform(self, X_red):
        check_is_fitted(self, "partition_")
        X_red = np.atleast_2d(np.asarray(X_red, dtype=np.float64))
        return np.vstack([backproject(row, self.partition_) for row in X_red])
