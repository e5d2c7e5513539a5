"""Synthetic support-recovery benchmark: smoothed Gaussian designs with
spatially clustered sparse weights."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .core import GroundTruth, build_grid_adjacency, standardize_columns

ALLOWED_CLUSTER_SIZES = (1, 2, 4, 8, 16, 32, 64)


@dataclass(frozen=True)
class SimSpec:
    dims: tuple[int, int] = (32, 64)
    n: int = 128
    k: int = 64
    c: int = 16
    sigma: float = 2.0
    beta_min: float = 0.2
    evr: float = 0.8
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        p = self.dims[0] * self.dims[1]
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 1 <= self.k <= p:
            raise ValueError(f"k must lie in [1, {p}], got {self.k}")
        if self.c not in ALLOWED_CLUSTER_SIZES:
            raise ValueError(f"c must be one of {ALLOWED_CLUSTER_SIZES}, got {self.c}")
        if self.k % self.c:
            raise ValueError(f"c={self.c} does not divide k={self.k}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if not 0 < self.evr < 1:
            raise ValueError("evr must lie in (0, 1)")

    @property
    def p(self) -> int:
        return self.dims[0] * self.dims[1]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dims"] = list(self.dims)
        return d


def gaussian_kernel(sigma):
    """Normalized discrete Gaussian truncated at radius ``ceil(4 sigma)``."""
    radius = int(math.ceil(4.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / sigma) ** 2)
    return g / g.sum()


def gaussian_smooth_2d(image, sigma):
    """Separable Gaussian smoothing of the last two axes, reflect boundary.

    Leading axes are treated as a batch of images.
    """
    image = np.asarray(image, dtype=np.float64)
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return image.copy()
    kernel = gaussian_kernel(sigma)
    out = correlate1d(image, kernel, axis=-2, mode="reflect")
    return correlate1d(out, kernel, axis=-1, mode="reflect")


def patch_shape(c):
    """Square patch when ``c`` is a perfect square, else a 1:2 rectangle."""
    s = math.isqrt(c)
    if s * s == c:
        return s, s
    h = math.isqrt(c // 2)
    return h, 2 * h


def patch_layout(dims, k, c):
    """Top-left corners of ``k / c`` patches spread over a regular lattice.

    The lattice shape maximizes the smallest gap between neighbouring
    patches; ties prefer square lattice cells, then more lattice rows.
    """
    rows, cols = dims
    h, w = patch_shape(c)
    n_patches = k // c
    best = None
    for pr in range(1, n_patches + 1):
        if n_patches % pr:
            continue
        pc = n_patches // pr
        cell_h, cell_w = rows / pr, cols / pc
        gap = min(cell_h - h, cell_w - w)
        key = (-gap, abs(math.log(cell_h / cell_w)), -pr)
        if best is None or key < best[0]:
            best = (key, pr, pc)
    _, pr, pc = best
    cell_h, cell_w = rows / pr, cols / pc
    corners = []
    for i in range(pr):
        for j in range(pc):
            top = int(math.floor((i + 0.5) * cell_h - h / 2))
            left = int(math.floor((j + 0.5) * cell_w - w / 2))
            corners.append((top, left))
    return corners, (h, w)


def _patch_pixels(dims, corners, shape):
    rows, cols = dims
    h, w = shape
    patches = []
    for top, left in corners:
        if top < 0 or left < 0 or top + h > rows or left + w > cols:
            raise ValueError("patches do not fit on the grid")
        rr, cc = np.meshgrid(np.arange(top, top + h), np.arange(left, left + w),
                             indexing="ij")
        patches.append((rr * cols + cc).ravel())
    return patches


def make_weights(spec: SimSpec, rng) -> GroundTruth:
    """Sparse weights: ``k / c`` disjoint, non-adjacent rectangular patches
    with values drawn uniformly in ``[beta_min, 1 + beta_min]``."""
    corners, shape = patch_layout(spec.dims, spec.k, spec.c)
    patches = _patch_pixels(spec.dims, corners, shape)
    occupied = np.full(spec.p, -1)
    for i, px in enumerate(patches):
        if np.any(occupied[px] >= 0):
            raise ValueError("patches overlap")
        occupied[px] = i
    grid = build_grid_adjacency(spec.dims)
    a, b = occupied[grid.edges[:, 0]], occupied[grid.edges[:, 1]]
    if np.any((a >= 0) & (b >= 0) & (a != b)):
        raise ValueError("patches touch; cannot place them disjointly")
    beta = np.zeros(spec.p)
    support = np.concatenate(patches)
    beta[support] = rng.uniform(spec.beta_min, 1.0 + spec.beta_min, size=len(support))
    return GroundTruth(beta=beta, cluster_size=spec.c, smoothing=spec.sigma)


def truth_patches(truth: GroundTruth, dims) -> list[np.ndarray]:
    """Connected components of the support (one per patch)."""
    grid = build_grid_adjacency(dims)
    nbrs = grid.neighbors()
    remaining = set(truth.support.tolist())
    comps = []
    while remaining:
        seed = remaining.pop()
        comp, stack = [seed], [seed]
        while stack:
            v = stack.pop()
            for u in nbrs[v]:
                if u in remaining:
                    remaining.remove(u)
                    comp.append(u)
                    stack.append(u)
        comps.append(np.sort(comp))
    return comps


def generate_dataset(spec: SimSpec):
    """Draw ``(X, y, truth, signal)`` for ``spec``.

    Rows of ``X`` are i.i.d. standard-normal images smoothed with
    :func:`gaussian_smooth_2d`, then columns are standardized. The noise
    standard deviation is ``std(X beta) * sqrt((1 - evr) / evr)``.
    """
    design_ss, weight_ss, noise_ss = np.random.SeedSequence(int(spec.seed)).spawn(3)
    rows, cols = spec.dims
    raw = np.random.default_rng(design_ss).standard_normal((spec.n, rows, cols))
    X, _, _ = standardize_columns(gaussian_smooth_2d(raw, spec.sigma).reshape(spec.n, -1))
    truth = make_weights(spec, np.random.default_rng(weight_ss))
    signal = X @ truth.beta
    sd = signal.std()
    if sd <= 0:
        raise ValueError("signal has zero variance")
    noise_sd = sd * math.sqrt((1.0 - spec.evr) / spec.evr)
    y = signal + noise_sd * np.random.default_rng(noise_ss).standard_normal(spec.n)
    return X, y, truth, signal


def nmin_estimate(k, p, theta=1.0):
    """Sample-size threshold ``2 theta k log(p - k)`` for sparse recovery."""
    if not p > k >= 1:
        raise ValueError(f"need p > k >= 1, got k={k}, p={p}")
    if theta <= 0:
        raise ValueError("theta must be positive")
    return 2.0 * theta * k * math.log(p - k)


def binarize_target(y):
    """Median split into labels -1 / +1 (values at the median go to -1)."""
    y = np.asarray(y, dtype=np.float64)
    return np.where(y > np.median(y), 1.0, -1.0)
