"""Support-recovery and prediction metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PRCurve:
    """Precision/recall/FPR at each distinct score threshold (descending)."""

    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    fpr: np.ndarray
    auc_pr: float
    auc_roc: float


def _support_mask(truth, p):
    support = getattr(truth, "support", truth)
    support = np.asarray(support)
    if support.dtype == bool:
        if support.shape != (p,):
            raise ValueError("boolean support must have one entry per feature")
        mask = support.copy()
    else:
        mask = np.zeros(p, dtype=bool)
        mask[support.astype(np.int64)] = True
    k = int(mask.sum())
    if k == 0 or k == p:
        raise ValueError("support must be a non-empty proper subset of the features")
    return mask


def pr_and_roc(scores, truth) -> PRCurve:
    """Precision-recall and ROC curves of ``scores`` against a true support.

    ``truth`` is a :class:`GroundTruth`, an index array or a boolean mask.
    Tied scores form a single threshold. Areas are trapezoids: PR over
    recall starting from ``(0, precision at the first threshold)``, ROC over
    FPR starting from ``(0, 0)``.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or not np.all(np.isfinite(scores)):
        raise ValueError("scores must be a finite 1D array")
    mask = _support_mask(truth, len(scores))
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    hits = mask[order].astype(np.int64)
    last = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1]
    tp = np.cumsum(hits)[last]
    fp = (last + 1) - tp
    k = int(mask.sum())
    precision = tp / (tp + fp)
    recall = tp / k
    fpr = fp / (len(scores) - k)

    r = np.r_[0.0, recall]
    pr = np.r_[precision[0], precision]
    auc_pr = float(np.sum(np.diff(r) * (pr[1:] + pr[:-1]) / 2))
    f = np.r_[0.0, fpr]
    t = np.r_[0.0, recall]
    auc_roc = float(np.sum(np.diff(f) * (t[1:] + t[:-1]) / 2))
    return PRCurve(thresholds=s[last], precision=precision, recall=recall,
                   fpr=fpr, auc_pr=auc_pr, auc_roc=auc_roc)


def explained_variance(y_true, y_pred):
    """``1 - Var(y_true - y_pred) / Var(y_true)``."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or len(y_true) < 2:
        raise ValueError("y_true and y_pred must be 1D of equal length >= 2")
    var = np.var(y_true)
    if var <= 0:
        raise ValueError("y_true has zero variance")
    return float(1.0 - np.var(y_true - y_pred) / var)


def accuracy(y_true, y_pred):
    y_true = np.asarray(y_true)
    return float(np.mean(y_true == np.asarray(y_pred)))
