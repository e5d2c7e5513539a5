"""Sparse support recovery with randomization and spatially-constrained
Ward clustering."""

from .core import (
    GroundTruth,
    Partition,
    SpatialGrid,
    StabilityScores,
    backproject,
    build_grid_adjacency,
    reduce_by_partition,
    standardize_columns,
)
from .linear_model import ElasticNetCD, LassoCD, LogisticCD, WardLasso
from .randomization import (
    ClusterSource,
    RandomizationConfig,
    RandomizedLasso,
    RandomizedWardLasso,
    randomized_lasso,
    randomized_ward_lasso,
    stability_support,
)
from .ward import MergeTree, WardAgglomeration, cut_tree, ward_cluster

__version__ = "0.1.0"
