"""File formats: design/target CSV, a bit-exact binary matrix format,
per-feature vectors and score grids."""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

MAGIC = b"WLMATRX1"
_HEADER = struct.Struct("<8sQQ")


def write_binary(path, X):
    """Write ``X`` as magic, u64 rows, u64 cols, then row-major LE float64."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError("only 1D or 2D arrays can be written")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, X.shape[0], X.shape[1]))
        fh.write(np.ascontiguousarray(X, dtype="<f8").tobytes())


def read_binary(path):
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, rows, cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    body = data[_HEADER.size:]
    if len(body) != rows * cols * 8:
        raise ValueError(f"{path}: expected {rows * cols * 8} bytes of data, got {len(body)}")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(np.float64)


def write_csv(path, X, y=None):
    """One sample per row; ``y`` (if given) is the final column."""
    X = np.asarray(X, dtype=np.float64)
    if y is not None:
        X = np.column_stack([X, np.asarray(y, dtype=np.float64)])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in X:
            writer.writerow([repr(float(v)) for v in row])


def read_csv(path, has_target=False):
    """Inverse of :func:`write_csv`; returns ``X`` or ``(X, y)``."""
    with open(path, newline="") as fh:
        rows = [[float(v) for v in row] for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty file")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: ragged rows")
    data = np.array(rows, dtype=np.float64)
    if has_target:
        return data[:, :-1], data[:, -1]
    return data


def read_matrix(path):
    """Binary if the file starts with the magic, CSV otherwise."""
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    return read_binary(path) if head == MAGIC else read_csv(path)


def write_vector(path, values, name):
    """Per-feature vector as ``feature,<name>`` CSV."""
    values = np.asarray(values)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature", name])
        for j, v in enumerate(values):
            writer.writerow([j, repr(v.item())])


def read_vector(path):
    """Read a ``feature,<name>`` CSV; returns ``(name, values)``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    if len(header) != 2 or header[0] != "feature":
        raise ValueError(f"{path}: expected a 'feature,<name>' header")
    idx = np.array([int(r[0]) for r in rows])
    if not np.array_equal(idx, np.arange(len(rows))):
        raise ValueError(f"{path}: feature column must be 0..p-1 in order")
    return header[1], np.array([float(r[1]) for r in rows])


def write_index_set(path, indices):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature"])
        for j in indices:
            writer.writerow([int(j)])


def read_index_set(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["feature"]:
            raise ValueError(f"{path}: expected a 'feature' header")
        return np.array([int(r[0]) for r in reader if r], dtype=np.int64)


def write_score_grid(path, scores, dims):
    """Scores laid out row-major on the ``dims`` grid, one grid row per line."""
    grid = np.asarray(scores, dtype=np.float64).reshape(dims)
    write_csv(path, grid)
