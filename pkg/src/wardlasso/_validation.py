"""Input validation helpers shared by the functional and estimator APIs."""

import numpy as np
from sklearn.utils.validation import check_array, check_consistent_length


def check_design(X, min_samples=2):
    X = check_array(X, dtype=np.float64, ensure_min_samples=min_samples)
    return X


def check_regression(X, y, min_samples=2):
    X = check_design(X, min_samples=min_samples)
    y = check_array(y, dtype=np.float64, ensure_2d=False)
    if y.ndim != 1:
        raise ValueError(f"y must be 1D, got shape {y.shape}")
    check_consistent_length(X, y)
    return X, y


def check_binary(X, y, min_samples=2):
    """Validate a classification pair; return y encoded as -1/+1.

    Labels already in {-1, +1} are kept; any other two-valued target maps
    its sorted classes to (-1, +1).
    """
    X = check_design(X, min_samples=min_samples)
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"y must be 1D, got shape {y.shape}")
    check_consistent_length(X, y)
    classes = np.unique(y)
    if len(classes) != 2:
        raise ValueError(
            f"binary classification needs exactly two classes, got {len(classes)}"
        )
    return X, np.where(y == classes[1], 1.0, -1.0)


def check_fraction(name, value, low=0.0, high=1.0, low_open=False):
    ok = (low < value if low_open else low <= value) and value <= high
    if not ok:
        bracket = "(" if low_open else "["
        raise ValueError(f"{name} must lie in {bracket}{low}, {high}], got {value}")
    return float(value)
