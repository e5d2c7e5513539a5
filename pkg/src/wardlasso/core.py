"""Shared data model: spatial grids, feature partitions and the
reduce / back-project operators used by every clustered estimator."""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_design


class ConstantColumnWarning(RuntimeWarning):
    """A column with zero variance was standardized to all zeros."""


@dataclass(frozen=True)
class SpatialGrid:
    """A 2D grid of features with 4-neighbour adjacency.

    Node ``r * cols + c`` is the pixel at row ``r``, column ``c``.
    """

    dims: tuple[int, int]
    edges: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.dims[0] * self.dims[1]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for a, b in self.edges:
            adj[a].append(int(b))
            adj[b].append(int(a))
        return adj


def build_grid_adjacency(dims) -> SpatialGrid:
    """Build the 4-neighbourhood edge list of a ``rows x cols`` grid."""
    rows, cols = (int(d) for d in dims)
    if rows < 1 or cols < 1:
        raise ValueError(f"grid dimensions must be positive, got {dims!r}")
    idx = np.arange(rows * cols).reshape(rows, cols)
    horizontal = np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])
    vertical = np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()])
    edges = np.vstack([horizontal, vertical]).astype(np.int64)
    edges.setflags(write=False)
    return SpatialGrid(dims=(rows, cols), edges=edges)


@dataclass(frozen=True)
class Partition:
    """Assignment of ``p`` features to ``q`` non-empty clusters."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a non-empty 1D array")
        if not np.issubdtype(labels.dtype, np.integer):
            raise ValueError("labels must be integers")
        labels = labels.astype(np.int64)
        q = int(labels.max()) + 1
        if labels.min() < 0:
            raise ValueError("labels must be non-negative")
        if np.any(np.bincount(labels, minlength=q) == 0):
            raise ValueError("every cluster in [0, q) must be non-empty")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def q(self) -> int:
        return int(self.labels.max()) + 1

    @property
    def p(self) -> int:
        return len(self.labels)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.q)

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)

    @classmethod
    def singletons(cls, p: int) -> "Partition":
        return cls(np.arange(p))


@dataclass(frozen=True)
class StabilityScores:
    """Per-feature selection frequencies.

    ``counts[v]`` is the number of repetitions (out of ``n_resampling``)
    in which feature ``v`` was selected; ``a`` is the normalized score.
    """

    counts: np.ndarray
    n_resampling: int

    @property
    def a(self) -> np.ndarray:
        return self.counts / self.n_resampling

    def __len__(self):
        return len(self.counts)


@dataclass(frozen=True)
class GroundTruth:
    beta: np.ndarray
    cluster_size: int
    smoothing: float

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.beta)

    @property
    def k(self) -> int:
        return int(np.count_nonzero(self.beta))


def standardize_columns(X):
    """Center columns and scale them to unit (population) standard deviation.

    Constant columns get scale 1 and come out as all zeros; a
    :class:`ConstantColumnWarning` is emitted.

    Returns
    -------
    Xs : ndarray of shape (n, p)
    means : ndarray of shape (p,)
    scales : ndarray of shape (p,)
    """
    X = check_design(X)
    means = X.mean(axis=0)
    Xc = X - means
    scales = np.sqrt(np.mean(Xc**2, axis=0))
    constant = scales <= 1e-12 * np.maximum(1.0, np.abs(means))
    if np.any(constant):
        warnings.warn(
            f"{int(constant.sum())} constant column(s) set to zero",
            ConstantColumnWarning,
            stacklevel=2,
        )
        scales = np.where(constant, 1.0, scales)
        Xc[:, constant] = 0.0
    return Xc / scales, means, scales


def _check_labels(labels, p):
    labels = np.asarray(labels)
    if labels.shape != (p,):
        raise ValueError(f"labels must have shape ({p},), got {labels.shape}")
    return labels


def reduce_by_partition(X, partition: Partition) -> np.ndarray:
    """Replace each cluster of columns by its mean column.

    Output column ``c`` is the mean over members of cluster ``c``.
    Summation is sequential (no BLAS), so results are bitwise reproducible.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2D")
    labels = _check_labels(partition.labels, X.shape[1])
    order = np.argsort(labels, kind="stable")
    sizes = np.bincount(labels, minlength=partition.q)
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    sums = np.add.reduceat(X[:, order], starts, axis=1)
    return sums / sizes


def backproject(beta_red, partition: Partition) -> np.ndarray:
    """Give every feature the coefficient of the cluster it belongs to.

    Coefficients are copied, not divided by cluster size.
    """
    beta_red = np.asarray(beta_red, dtype=np.float64)
    if beta_red.shape != (partition.q,):
        raise ValueError(
            f"expected {partition.q} cluster coefficients, got shape {beta_red.shape}"
        )
    return beta_red[partition.labels]


def is_connected_subset(nodes, neighbors: list[list[int]]) -> bool:
    """Flood-fill check that ``nodes`` induce a connected subgraph."""
    nodes = set(int(v) for v in nodes)
    if not nodes:
        return False
    start = next(iter(nodes))
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for u in neighbors[v]:
            if u in nodes and u not in seen:
                seen.add(u)
                queue.append(u)
    return len(seen) == len(nodes)


def partition_is_connected(partition: Partition, grid: SpatialGrid) -> bool:
    if partition.p != grid.n_nodes:
        raise ValueError("partition and grid disagree on the number of features")
    neighbors = grid.neighbors()
    return all(
        is_connected_subset(partition.members(c), neighbors)
        for c in range(partition.q)
    )
