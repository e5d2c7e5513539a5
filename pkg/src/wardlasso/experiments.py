"""Recovery benchmarks: method pipelines, parameter sweeps, clustering
ablation and the prediction-validation protocol."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .core import build_grid_adjacency
from .linear_model import ElasticNetCD, LassoCD, LogisticCD, WardLasso
from .metrics import pr_and_roc
from .model_selection import cross_validate
from .randomization import (
    ClusterSource,
    RandomizationConfig,
    randomized_lasso,
    randomized_ward_lasso,
)
from .solvers import enet_cd, lambda_grid, logistic_l1, univariate_f_scores
from .synthetic import SimSpec, generate_dataset

METHODS = ("f-test", "lasso", "enet", "randomized-lasso", "randomized-ward-lasso")
RHO_GRID = (0.1, 0.5, 0.9, 1.0)
Q_FRACTIONS = (64, 32, 16, 8, 4)


def q_grid(p):
    return sorted({max(1, p // d) for d in Q_FRACTIONS})


def derive_seed(*key) -> int:
    """A 32-bit seed that depends only on the integer ``key``."""
    return int(np.random.SeedSequence([int(k) for k in key]).generate_state(1)[0])


def select_parameters(method, X, y, dims, seed=0, n_folds=6, loss="square"):
    """Cross-validated hyper-parameters for ``method``.

    Randomized methods are tuned through their non-randomized counterpart:
    the lasso for the randomized lasso, a single ward + lasso fit for the
    randomized ward lasso. With ``loss="logistic"`` the l1-logistic model
    replaces the lasso and accuracy replaces explained variance.

    Returns ``(params, report)``; ``report`` is None for the F-test.
    """
    if method == "f-test":
        return {}, None
    logistic = loss == "logistic"
    task = "classification" if logistic else "regression"
    if logistic:
        lams = lambda_grid(X, y, loss="logistic")
        sparse = LogisticCD(penalty="l1")
    else:
        lams = lambda_grid(X, y - y.mean())
        sparse = LassoCD()
    if method in ("lasso", "randomized-lasso"):
        est, grid = sparse, [{"lam": lam} for lam in lams]
    elif method == "enet":
        if logistic:
            raise ValueError("enet is only available with the square loss")
        est = ElasticNetCD()
        grid = [{"rho": rho, "lam": lam / rho} for rho in RHO_GRID for lam in lams]
    elif method == "randomized-ward-lasso":
        est = WardLasso(dims=tuple(dims), loss=loss)
        grid = [{"n_clusters": q, "lam": lam}
                for q in q_grid(X.shape[1]) for lam in lams]
    else:
        raise ValueError(f"unknown method {method!r}")
    rep = cross_validate(est, X, y, grid, n_folds=n_folds, seed=seed, task=task)
    return rep.best_params, rep


def method_scores(method, X, y, params, dims, seed=0, n_resampling=200, n_jobs=1,
                  source=ClusterSource.RANDOMIZED, loss="square", alpha=0.5, pi=0.75):
    """Per-feature recovery scores of ``method`` at fixed parameters.

    F values for the F-test, absolute coefficients for lasso / elastic net,
    stability scores for the randomized methods.
    """
    logistic = loss == "logistic"
    if method == "f-test":
        return univariate_f_scores(X, y, task="classification" if logistic else "regression")
    if method in ("lasso", "enet"):
        if logistic:
            if method == "enet":
                raise ValueError("enet is only available with the square loss")
            return np.abs(logistic_l1(X, y, params["lam"]).beta)
        rho = params.get("rho", 1.0) if method == "enet" else 1.0
        return np.abs(enet_cd(X - X.mean(axis=0), y - y.mean(), params["lam"], rho).beta)
    if method == "randomized-lasso":
        cfg = RandomizationConfig(lam=params["lam"], alpha=alpha, pi=pi,
                                  n_resampling=n_resampling, seed=seed, loss=loss)
        return randomized_lasso(X, y, cfg, n_jobs=n_jobs).a
    if method == "randomized-ward-lasso":
        cfg = RandomizationConfig(lam=params["lam"], q=int(params["n_clusters"]),
                                  alpha=alpha, pi=pi, n_resampling=n_resampling,
                                  seed=seed, loss=loss)
        grid = build_grid_adjacency(dims)
        return randomized_ward_lasso(X, y, grid, cfg, source=source, n_jobs=n_jobs).a
    raise ValueError(f"unknown method {method!r}")


@dataclass
class SweepResult:
    """Long-format recovery results of a (cluster size x smoothing) sweep."""

    c_values: list
    sigma_values: list
    methods: list
    rows: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def cell(self, c, sigma, method, metric="auc_roc"):
        vals = np.array([r[metric] for r in self.rows
                         if r["c"] == c and r["sigma"] == sigma and r["method"] == method])
        return vals

    def summary(self, metric="auc_roc"):
        out = []
        for c in self.c_values:
            for s in self.sigma_values:
                stats = {}
                for m in self.methods:
                    v = self.cell(c, s, m, metric)
                    stats[m] = {"mean": float(v.mean()), "std": float(v.std())}
                best = max(self.methods, key=lambda m: stats[m]["mean"])
                out.append({"c": c, "sigma": s, "methods": stats, "best_method": best})
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["c", "sigma", "method", "seed", "auc_pr", "auc_roc"])
        for r in self.rows:
            writer.writerow([r["c"], r["sigma"], r["method"], r["seed"],
                             repr(r["auc_pr"]), repr(r["auc_roc"])])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({
            "c_values": self.c_values,
            "sigma_values": self.sigma_values,
            "methods": self.methods,
            "summary_auc_roc": self.summary("auc_roc"),
            "summary_auc_pr": self.summary("auc_pr"),
            "params": self.params,
        }, indent=2)


def _sigma_key(sigma):
    return int(round(float(sigma) * 1000))


def run_cell(template: SimSpec, c, sigma, methods, n_seeds, n_resampling=200,
             seed=0, n_jobs=1, n_folds=6):
    """Tune every method on one dataset, then score ``n_seeds`` fresh ones.

    All seeds derive from ``(seed, c, sigma)`` so a cell gives the same
    answer whatever else is in the sweep.
    """
    key = (seed, c, _sigma_key(sigma))
    cv_spec = replace(template, c=c, sigma=sigma, seed=derive_seed(*key, 1, 0))
    X, y, _, _ = generate_dataset(cv_spec)
    params = {}
    cache = {}
    for m in methods:
        tuned_as = "lasso" if m == "randomized-lasso" else m
        if tuned_as not in cache:
            cache[tuned_as] = select_parameters(tuned_as, X, y, template.dims,
                                                seed=derive_seed(*key, 2), n_folds=n_folds)[0]
        params[m] = cache[tuned_as]

    rows = []
    for s in range(n_seeds):
        data_seed = derive_seed(*key, 0, s)
        X, y, truth, _ = generate_dataset(replace(template, c=c, sigma=sigma, seed=data_seed))
        for m in methods:
            scores = method_scores(m, X, y, params[m], template.dims, seed=data_seed,
                                   n_resampling=n_resampling, n_jobs=n_jobs)
            curve = pr_and_roc(scores, truth)
            rows.append({"c": c, "sigma": sigma, "method": m, "seed": s,
                         "auc_pr": curve.auc_pr, "auc_roc": curve.auc_roc})
    return rows, params


def sweep_experiment(template: SimSpec, c_values, sigma_values, methods=METHODS,
                     n_seeds=5, n_resampling=200, seed=0, n_jobs=1, n_folds=6):
    """Recovery AUC for every (cluster size, smoothing, method) cell."""
    methods = list(methods)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    for c in c_values:
        if template.k % c:
            raise ValueError(f"c={c} does not divide k={template.k}")
    result = SweepResult(c_values=list(c_values), sigma_values=list(sigma_values),
                         methods=methods)
    for c in c_values:
        for sigma in sigma_values:
            rows, params = run_cell(template, c, sigma, methods, n_seeds,
                                    n_resampling=n_resampling, seed=seed,
                                    n_jobs=n_jobs, n_folds=n_folds)
            result.rows.extend(rows)
            result.params[f"c={c},sigma={sigma}"] = params
    return result


def ablation_experiment(spec: SimSpec, n_seeds=10, n_resampling=200, params=None,
                        seed=0, n_jobs=1, n_folds=6):
    """Recovery of the randomized ward lasso under each cluster source.

    Every mode sees the same datasets and the same repetition seeds.
    ``params`` (``lam``, ``n_clusters``) default to cross-validation on an
    extra dataset.

    Returns ``{mode: {"auc_roc": [...], "auc_pr": [...], "mean", "std", "se"}}``
    and the parameters used.
    """
    if params is None:
        X, y, _, _ = generate_dataset(replace(spec, seed=derive_seed(seed, 1)))
        params, _ = select_parameters("randomized-ward-lasso", X, y, spec.dims,
                                      seed=derive_seed(seed, 2), n_folds=n_folds)
    results = {m.value: {"auc_roc": [], "auc_pr": []} for m in ClusterSource}
    for s in range(n_seeds):
        data_seed = derive_seed(seed, 0, s)
        X, y, truth, _ = generate_dataset(replace(spec, seed=data_seed))
        for mode in ClusterSource:
            scores = method_scores("randomized-ward-lasso", X, y, params, spec.dims,
                                   seed=data_seed, n_resampling=n_resampling,
                                   n_jobs=n_jobs, source=mode)
            curve = pr_and_roc(scores, truth)
            results[mode.value]["auc_roc"].append(curve.auc_roc)
            results[mode.value]["auc_pr"].append(curve.auc_pr)
    for r in results.values():
        a = np.asarray(r["auc_roc"])
        r["mean"] = float(a.mean())
        r["std"] = float(a.std(ddof=1)) if len(a) > 1 else 0.0
        r["se"] = r["std"] / np.sqrt(len(a))
    return results, params


def top_features(scores, m):
    """Indices of the ``m`` highest scores; ties go to the lower index."""
    scores = np.asarray(scores, dtype=np.float64)
    if not 1 <= m <= len(scores):
        raise ValueError(f"m must lie in [1, {len(scores)}], got {m}")
    return np.sort(np.argsort(-scores, kind="stable")[:m])


def prediction_validation(scores, X_train, y_train, X_test, y_test, m_grid,
                          lam_grid=None, n_folds=6, seed=0):
    """Held-out accuracy of l2-logistic regression on the best-scored features.

    ``(m, lam)`` is chosen by stratified cross-validation on the training
    data; the model is then refit on all training data restricted to the
    top-``m`` features and scored on the test set.

    Returns ``{"accuracy", "m", "lam", "cv_accuracy"}``.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    X_test = np.asarray(X_test, dtype=np.float64)
    p = X_train.shape[1]
    if any(m > p or m < 1 for m in m_grid):
        raise ValueError(f"every m must lie in [1, {p}]")
    if lam_grid is None:
        lam_grid = np.geomspace(1.0, 1e-4, 9)
    best = None
    for m in m_grid:
        cols = top_features(scores, m)
        rep = cross_validate(LogisticCD(penalty="l2"), X_train[:, cols], y_train,
                             [{"lam": lam} for lam in lam_grid], n_folds=n_folds,
                             seed=seed, task="classification")
        cand = (rep.mean_scores[rep.best_index], -m, rep.best_params["lam"])
        if best is None or cand[:2] > best[0][:2]:
            best = (cand, m, rep.best_params["lam"])
    (cv_acc, _, _), m, lam = best
    cols = top_features(scores, m)
    model = LogisticCD(lam=lam, penalty="l2").fit(X_train[:, cols], y_train)
    acc = float(np.mean(model.predict(X_test[:, cols]) == np.asarray(y_test)))
    return {"accuracy": acc, "m": int(m), "lam": float(lam), "cv_accuracy": float(cv_acc)}
