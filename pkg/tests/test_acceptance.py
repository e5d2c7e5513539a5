"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL ...`` line; the lines
are also repeated in the terminal summary (see ``conftest.py``). Run with
``pytest tests/test_acceptance.py -s`` to see them inline.
"""

import itertools
import time
from collections import deque

import numpy as np
import pytest

from oracles import (
    central_difference,
    enet_objective as oracle_objective,
    enumerate_curves,
    fista_enet,
    orthonormal_design,
    soft_threshold,
    ward_merge_oracle,
)
from wardlasso.core import build_grid_adjacency, standardize_columns
from wardlasso.experiments import METHODS, method_scores, run_cell, select_parameters
from wardlasso.experiments import ablation_experiment
from wardlasso.metrics import pr_and_roc
from wardlasso.randomization import RandomizationConfig, randomized_lasso, randomized_ward_lasso
from wardlasso.solvers import (
    enet_kkt_residual,
    lambda_max,
    lasso_cd,
    logistic_gradient,
    logistic_objective,
)
from wardlasso.synthetic import SimSpec, generate_dataset, nmin_estimate
from wardlasso.ward import cut_tree, ward_cluster

LINES: list[str] = []


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


# -- 1 ---------------------------------------------------------------------

def test_criterion_01_nmin_anchor():
    v = nmin_estimate(64, 2048, 1.0)
    report(1, abs(v - 971.9) <= 0.1, f"nmin(k=64, p=2048) = {v:.3f}")


# -- 2 ---------------------------------------------------------------------

def test_criterion_02_solver_oracles():
    worst_closed = 0.0
    for s in range(200):
        rng = np.random.default_rng(s)
        X = orthonormal_design(rng, 64, 32)
        y = X @ (rng.standard_normal(32) * (rng.random(32) < 0.3)) + rng.standard_normal(64)
        y -= y.mean()
        lam = rng.uniform(0.05, 0.9) * lambda_max(X, y)
        exact = soft_threshold(X.T @ y / 64, lam)
        worst_closed = max(worst_closed, np.max(np.abs(lasso_cd(X, y, lam).beta - exact)))

    worst_kkt, worst_obj = 0.0, 0.0
    for s in range(50):
        rng = np.random.default_rng(1000 + s)
        X, _, _ = standardize_columns(rng.standard_normal((40, 100)))
        beta = np.zeros(100)
        beta[rng.choice(100, 5, replace=False)] = rng.uniform(0.5, 2, 5) * rng.choice([-1, 1], 5)
        y = X @ beta + 0.5 * rng.standard_normal(40)
        y -= y.mean()
        lam = rng.uniform(0.05, 0.8) * lambda_max(X, y)
        b = lasso_cd(X, y, lam).beta
        worst_kkt = max(worst_kkt, enet_kkt_residual(X, y, b, lam))
        ref = oracle_objective(X, y, fista_enet(X, y, lam), lam)
        ours = oracle_objective(X, y, b, lam)
        worst_obj = max(worst_obj, (ours - ref) / abs(ref))

    ok = worst_closed <= 1e-6 and worst_kkt <= 1e-5 and worst_obj <= 1e-8
    report(2, ok, f"closed-form err {worst_closed:.1e}, KKT {worst_kkt:.1e}, "
                  f"objective gap {worst_obj:.1e}")


# -- 3 ---------------------------------------------------------------------

def _flood_fill_connected(labels, dims):
    nx, ny = dims
    for c in np.unique(labels):
        members = set(np.flatnonzero(labels == c).tolist())
        start = next(iter(members))
        seen, todo = {start}, deque([start])
        while todo:
            v = todo.popleft()
            i, j = divmod(v, ny)
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                a, b = i + di, j + dj
                w = a * ny + b
                if 0 <= a < nx and 0 <= b < ny and w in members and w not in seen:
                    seen.add(w)
                    todo.append(w)
        if seen != members:
            return False
    return True


def test_criterion_03_ward_oracle():
    shapes = [(2, 2), (2, 3), (3, 3)]
    mismatches, disconnected = 0, 0
    for s in range(100):
        dims = shapes[s % 3]
        grid = build_grid_adjacency(dims)
        X = np.random.default_rng(s).standard_normal((6, grid.n_nodes))
        tree = ward_cluster(X, grid)
        merges, _ = ward_merge_oracle(X, grid.edges)
        mismatches += [tuple(m) for m in tree.children.tolist()] != merges
        for q in range(1, grid.n_nodes + 1):
            disconnected += not _flood_fill_connected(cut_tree(tree, q).labels, dims)
    report(3, mismatches == 0 and disconnected == 0,
           f"{mismatches} merge-sequence mismatches, {disconnected} disconnected cuts "
           "over 100 instances")


# -- 4 and 9 (first half) --------------------------------------------------

def _singleton_instance(s):
    dims = (6, 8)
    X, y, _, _ = generate_dataset(SimSpec(dims=dims, n=40, k=8, c=4, sigma=1.0, seed=s))
    return X, y, build_grid_adjacency(dims)


def _singleton_scores(n_jobs):
    out = []
    for s in range(10):
        X, y, grid = _singleton_instance(s)
        cfg = RandomizationConfig(lam=0.1 + 0.02 * s, q=grid.n_nodes, n_resampling=20, seed=s)
        out.append((randomized_ward_lasso(X, y, grid, cfg, n_jobs=n_jobs),
                    randomized_lasso(X, y, cfg, n_jobs=n_jobs)))
    return out


def test_criterion_04_singleton_equivalence():
    same = sum(np.array_equal(a.counts, b.counts) and a.a.tobytes() == b.a.tobytes()
               for a, b in _singleton_scores(1))
    report(4, same == 10, f"{same}/10 instances bitwise identical")


# -- 5 ---------------------------------------------------------------------

def test_criterion_05_generator_calibration():
    means = {}
    for sigma in (0.0, 2.0):
        ratios = []
        for i in range(20):
            _, y, _, signal = generate_dataset(SimSpec(sigma=sigma, seed=i))
            ratios.append(np.var(signal) / np.var(y))
        means[sigma] = float(np.mean(ratios))
    ok = all(0.76 <= v <= 0.84 for v in means.values())
    report(5, ok, "mean explained variance " +
           ", ".join(f"sigma={s:g}: {v:.4f}" for s, v in means.items()))


# -- 6 and 9 (second half) -------------------------------------------------

def _figure_cells(n_jobs):
    good, _ = run_cell(SimSpec(n=256), 16, 2.0, ["randomized-ward-lasso"], 5,
                       n_resampling=50, seed=0, n_jobs=n_jobs)
    bad, _ = run_cell(SimSpec(n=128), 1, 0.0, list(METHODS), 5,
                      n_resampling=50, seed=0, n_jobs=n_jobs)
    return good, bad


@pytest.fixture(scope="module")
def figure_cells():
    t = time.perf_counter()
    cells = _figure_cells(1)
    return cells, time.perf_counter() - t


def test_criterion_06_regional_reproduction(figure_cells):
    (good, bad), elapsed = figure_cells
    rwl = np.mean([r["auc_roc"] for r in good])
    fails = {m: np.mean([r["auc_roc"] for r in bad if r["method"] == m]) for m in METHODS}
    ok = rwl >= 0.75 and all(v < 0.95 for v in fails.values()) and elapsed <= 1800
    report(6, ok, f"c=16 sigma=2 randomized-ward-lasso ROC {rwl:.3f}; c=1 sigma=0 max ROC "
                  f"{max(fails.values()):.3f} ({max(fails, key=fails.get)}); {elapsed:.0f}s")


# -- 7 ---------------------------------------------------------------------

def test_criterion_07_ablation_ordering():
    t = time.perf_counter()
    res, _ = ablation_experiment(SimSpec(n=128, c=16, sigma=2.0), n_seeds=10, seed=0)
    elapsed = time.perf_counter() - t
    r, iid, fixed = (res[m] for m in ("randomized", "random-iid-signal", "fixed-on-full-data"))
    ok = r["mean"] > iid["mean"] and iid["mean"] >= fixed["mean"] - iid["se"] \
        and elapsed <= 1800
    report(7, ok, f"randomized {r['mean']:.4f} > iid {iid['mean']:.4f} "
                  f">= fixed {fixed['mean']:.4f} (se {iid['se']:.4f}); {elapsed:.0f}s")


# -- 8 ---------------------------------------------------------------------

def test_criterion_08_more_features_than_samples():
    spec = SimSpec(n=32, k=64, c=16, sigma=2.0, seed=0)
    X, y, _, _ = generate_dataset(spec)
    rwl_params, _ = select_parameters("randomized-ward-lasso", X, y, spec.dims, seed=1)
    lasso_params, _ = select_parameters("lasso", X, y, spec.dims, seed=1)
    a = method_scores("randomized-ward-lasso", X, y, rwl_params, spec.dims, seed=2)
    b = method_scores("lasso", X, y, lasso_params, spec.dims)
    n_rwl, n_lasso = int(np.count_nonzero(a)), int(np.count_nonzero(b))
    report(8, n_rwl > 32 and n_lasso <= 32,
           f"randomized-ward-lasso nonzero scores {n_rwl}, lasso support {n_lasso}")


# -- 9 ---------------------------------------------------------------------

def test_criterion_09_parallel_determinism(figure_cells):
    serial4 = _singleton_scores(1)
    par4 = _singleton_scores(8)
    same4 = all(x.counts.tobytes() == y.counts.tobytes()
                for pa, pb in zip(serial4, par4) for x, y in zip(pa, pb))
    (good, bad), _ = figure_cells
    pgood, pbad = _figure_cells(8)
    same6 = good == pgood and bad == pbad
    report(9, same4 and same6, f"criterion 4 identical: {same4}; criterion 6 identical: {same6}")


# -- 10 --------------------------------------------------------------------

def test_criterion_10_logistic_gradients():
    worst = 0.0
    for s in range(20):
        rng = np.random.default_rng(s)
        n, p = rng.integers(10, 40), rng.integers(2, 8)
        X = rng.standard_normal((n, p))
        y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        y[:2] = (1.0, -1.0)
        beta = rng.uniform(0.1, 1.0, p) * rng.choice([-1, 1], p)  # away from the l1 kink
        b0 = rng.standard_normal()
        lam = rng.uniform(0.01, 0.5)
        for penalty in ("l1", "l2"):
            gb, gi = logistic_gradient(X, y, beta, b0, lam, penalty)
            g = np.r_[gb, gi]
            fd = central_difference(
                lambda w: logistic_objective(X, y, w[:-1], w[-1], lam, penalty), np.r_[beta, b0])
            worst = max(worst, np.linalg.norm(g - fd) / np.linalg.norm(fd))
    report(10, worst < 1e-5, f"max relative gradient error {worst:.1e} over 20 instances")


# -- 11 --------------------------------------------------------------------

def _weak_orderings(p):
    """Every assignment of tie levels to p items, up to relabeling."""
    for levels in itertools.product(range(p), repeat=p):
        used = sorted(set(levels))
        if used == list(range(len(used))):
            yield np.array(levels, dtype=float)


def test_criterion_11_metric_oracle():
    checked, worst = 0, 0.0

    def check(scores, mask):
        nonlocal checked, worst
        _, pr, roc = enumerate_curves(scores, mask)
        got = pr_and_roc(scores, mask)
        worst = max(worst, abs(got.auc_pr - pr), abs(got.auc_roc - roc))
        checked += 1

    for p in range(2, 9):
        masks = [np.array(m, dtype=bool) for m in itertools.product([0, 1], repeat=p)
                 if 0 < sum(m) < p]
        # every strict ordering relative to the support is a label sequence
        for mask in masks:
            check(np.arange(p, 0, -1, dtype=float), mask)
        if p <= 6:
            for perm in itertools.permutations(range(p)):
                for mask in masks:
                    check(np.array(perm, dtype=float), mask)
        if p <= 5:
            for scores in _weak_orderings(p):
                for mask in masks:
                    check(scores, mask)
    report(11, worst <= 1e-12, f"{checked} (scores, support) cases, max |diff| {worst:.1e}")
