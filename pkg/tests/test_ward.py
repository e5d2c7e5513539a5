import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ward_merge_oracle
from wardlasso.core import (
    Partition,
    SpatialGrid,
    build_grid_adjacency,
    partition_is_connected,
    reduce_by_partition,
    standardize_columns,
)
from wardlasso.ward import (
    MergeTree,
    WardAgglomeration,
    cut_tree,
    ward_cluster,
    ward_partition,
    ward_tree,
)


def _as_sets(partition):
    return {frozenset(partition.members(c).tolist()) for c in range(partition.q)}


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 3), (1, 5)])
@pytest.mark.parametrize("seed", range(4))
def test_merges_match_exhaustive_oracle(dims, seed):
    rng = np.random.default_rng(seed)
    grid = build_grid_adjacency(dims)
    X = rng.standard_normal((5, grid.n_nodes))
    tree = ward_cluster(X, grid)
    merges, states = ward_merge_oracle(X, grid.edges)
    assert [tuple(m) for m in tree.children.tolist()] == merges
    for q in range(1, grid.n_nodes + 1):
        part = cut_tree(tree, q)
        assert _as_sets(part) == set(states[grid.n_nodes - q].values())
        assert partition_is_connected(part, grid)


def test_identical_adjacent_columns_merge_first():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((6, 4))
    X[:, 2] = X[:, 1]
    tree = ward_cluster(X, build_grid_adjacency((1, 4)))
    assert tuple(tree.children[0]) == (1, 2)
    assert tree.raw_heights[0] == 0.0


def test_near_duplicate_path():
    rng = np.random.default_rng(1)
    a = rng.standard_normal(30)
    X = np.column_stack([a, a + 1e-3 * rng.standard_normal(30), rng.standard_normal(30)])
    tree = ward_cluster(X, build_grid_adjacency((1, 3)))
    assert tuple(tree.children[0]) == (0, 1)


def test_exact_ties_use_smallest_pair():
    X = np.ones((3, 4))
    tree = ward_cluster(X, build_grid_adjacency((2, 2)))
    assert tuple(tree.children[0]) == (0, 1)
    merges, _ = ward_merge_oracle(X, build_grid_adjacency((2, 2)).edges)
    assert [tuple(m) for m in tree.children.tolist()] == merges


def test_first_merge_maximizes_adjacent_covariance():
    rng = np.random.default_rng(2)
    grid = build_grid_adjacency((4, 5))
    Z = rng.standard_normal((50, 20))
    Z[:, 7] += 2 * Z[:, 8]
    X, _, _ = standardize_columns(Z)
    tree = ward_cluster(X, grid)
    cov = [(X[:, a] @ X[:, b], min(a, b), max(a, b)) for a, b in grid.edges]
    assert tuple(tree.children[0]) == max(cov)[1:]


def test_tree_shape_and_heights():
    rng = np.random.default_rng(3)
    grid = build_grid_adjacency((4, 4))
    tree = ward_cluster(rng.standard_normal((8, 16)), grid)
    assert tree.n_merges == 15
    assert np.all(np.diff(tree.heights) >= 0)
    np.testing.assert_array_equal(tree.heights, np.maximum.accumulate(tree.raw_heights))
    payload = json.loads(tree.to_json())
    assert payload["n_leaves"] == 16
    assert payload["merges"][-1]["id"] == 30


def test_single_feature_tree_is_empty():
    tree = ward_cluster(np.ones((3, 1)), build_grid_adjacency((1, 1)))
    assert tree.n_merges == 0
    np.testing.assert_array_equal(cut_tree(tree, 1).labels, [0])


def test_cut_extremes_and_errors():
    rng = np.random.default_rng(4)
    grid = build_grid_adjacency((3, 4))
    tree = ward_cluster(rng.standard_normal((6, 12)), grid)
    np.testing.assert_array_equal(cut_tree(tree, 12).labels, np.arange(12))
    np.testing.assert_array_equal(cut_tree(tree, 1).labels, np.zeros(12))
    for q in (0, 13):
        with pytest.raises(ValueError):
            cut_tree(tree, q)
    partial = ward_tree(rng.standard_normal((6, 12)), grid, n_clusters=5)
    with pytest.raises(ValueError):
        cut_tree(partial, 4)


def test_labels_ordered_by_smallest_member():
    rng = np.random.default_rng(5)
    grid = build_grid_adjacency((5, 5))
    part = cut_tree(ward_cluster(rng.standard_normal((4, 25)), grid), 7)
    firsts = [part.members(c).min() for c in range(part.q)]
    assert firsts == sorted(firsts)


def test_early_stop_equals_full_tree_cut():
    rng = np.random.default_rng(6)
    grid = build_grid_adjacency((6, 7))
    X = rng.standard_normal((10, 42))
    full = ward_cluster(X, grid)
    for q in (1, 5, 20, 41):
        part = cut_tree(ward_tree(X, grid, n_clusters=q), q)
        np.testing.assert_array_equal(part.labels, cut_tree(full, q).labels)
        np.testing.assert_array_equal(ward_partition(X, grid, q).labels, part.labels)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_nesting_and_connectivity(rows, cols, seed):
    grid = build_grid_adjacency((rows, cols))
    p = grid.n_nodes
    X = np.random.default_rng(seed).standard_normal((4, p))
    tree = ward_cluster(X, grid)
    assert tree.n_merges == p - 1
    prev = None
    for q in range(1, p + 1):
        part = cut_tree(tree, q)
        assert part.q == q
        assert partition_is_connected(part, grid)
        if prev is not None:
            # every cluster at q sits inside one cluster at q - 1
            for c in range(q):
                assert len(set(prev.labels[part.members(c)])) == 1
        prev = part


def test_deterministic():
    rng = np.random.default_rng(7)
    grid = build_grid_adjacency((8, 8))
    X = rng.standard_normal((12, 64))
    a, b = ward_cluster(X, grid), ward_cluster(X.copy(), grid)
    np.testing.assert_array_equal(a.children, b.children)
    np.testing.assert_array_equal(a.raw_heights, b.raw_heights)


def test_disconnected_graph_rejected():
    grid = SpatialGrid(dims=(2, 2), edges=np.array([[0, 1], [2, 3]]))
    with pytest.raises(ValueError, match="disconnected"):
        ward_tree(np.random.default_rng(0).standard_normal((3, 4)), grid, 1)
    assert ward_tree(np.random.default_rng(0).standard_normal((3, 4)), grid, 2).n_merges == 2


def test_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        ward_cluster(np.ones((3, 5)), build_grid_adjacency((2, 2)))


def test_agglomeration_transformer():
    rng = np.random.default_rng(8)
    X = rng.standard_normal((10, 12))
    wa = WardAgglomeration(n_clusters=4, dims=(3, 4)).fit(X)
    assert wa.labels_.shape == (12,)
    Xr = wa.transform(X)
    assert Xr.shape == (10, 4)
    np.testing.assert_allclose(Xr, reduce_by_partition(X, wa.partition_))
    back = wa.inverse_transform(Xr)
    assert back.shape == (10, 12)
    np.testing.assert_allclose(back[:, 0], Xr[:, wa.labels_[0]])
    assert wa.get_params() == {"n_clusters": 4, "dims": (3, 4)}


def test_merge_tree_constructed_directly():
    tree = MergeTree(n_leaves=3, children=np.array([[0, 1], [2, 3]]),
                     raw_heights=np.array([2.0, 1.0]))
    np.testing.assert_array_equal(tree.heights, [2.0, 2.0])
    assert isinstance(cut_tree(tree, 2), Partition)
    np.testing.assert_array_equal(cut_tree(tree, 2).labels, [0, 0, 1])
