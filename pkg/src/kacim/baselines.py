"""Reference dependence measures: distance correlation and Gaussian-kernel HSIC."""
from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist, squareform

DENOM_FLOOR = 1e-24


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[0] != y.shape[0]:
        raise ValueError(f"row-count mismatch: {x.shape[0]} vs {y.shape[0]}")
    return x, y


def distance_matrix(m) -> np.ndarray:
    """Euclidean pairwise distances (n x n, zero diagonal)."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    return squareform(pdist(m))


def double_center(d: np.ndarray) -> np.ndarray:
    return d - d.mean(axis=0) - d.mean(axis=1)[:, None] + d.mean()


def u_center(d: np.ndarray) -> np.ndarray:
    """U-centred distance matrix (zero diagonal); needs ``n >= 3``."""
    n = d.shape[0]
    row = d.sum(axis=1)
    col = d.sum(axis=0)
    total = d.sum()
    out = d - row[:, None] / (n - 2) - col[None, :] / (n - 2) + total / ((n - 1) * (n - 2))
    np.fill_diagonal(out, 0.0)
    return out


def dcor_biased(x, y) -> float:
    """Sample distance correlation from double-centred distance matrices."""
    x, y = _pair(x, y)
    if x.shape[0] < 2:
        raise ValueError("distance correlation needs n >= 2")
    a = double_center(distance_matrix(x))
    b = double_center(distance_matrix(y))
    dcov2 = (a * b).mean()
    dvar2 = (a * a).mean() * (b * b).mean()
    if dvar2 < DENOM_FLOOR:
        return 0.0
    r2 = dcov2 / np.sqrt(dvar2)
    return float(np.sqrt(min(max(r2, 0.0), 1.0)))


def dcor_unbiased(x, y) -> float:
    """Bias-corrected distance correlation from U-centred matrices.

    Can be negative under independence; not clamped.
    """
    x, y = _pair(x, y)
    n = x.shape[0]
    if n < 4:
        raise ValueError("the unbiased distance correlation needs n >= 4")
    a = u_center(distance_matrix(x))
    b = u_center(distance_matrix(y))
    scale = 1.0 / (n * (n - 3))
    ab = (a * b).sum() * scale
    aa = (a * a).sum() * scale
    bb = (b * b).sum() * scale
    denom = aa * bb
    if denom < DENOM_FLOOR:
        return 0.0
    return float(ab / np.sqrt(denom))


def median_pairwise_distance(m) -> float:
    """Median of the ``n(n-1)/2`` pairwise distances, zeros included.

    An even count averages the two central values.  All-zero distances give 1.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.shape[0] < 2:
        raise ValueError("median distance needs n >= 2")
    d = pdist(m)
    if not np.any(d > 0):
        return 1.0
    return float(np.median(d))


def kernel_bandwidth(m) -> float:
    """Median-heuristic bandwidth; falls back to the median of nonzero distances."""
    sigma = median_pairwise_distance(m)
    if sigma > 0:
        return sigma
    d = pdist(np.asarray(m, dtype=np.float64).reshape(len(m), -1))
    return float(np.median(d[d > 0]))


def gaussian_gram(m, sigma: float) -> np.ndarray:
    d = distance_matrix(m)
    return np.exp(-(d * d) / (2.0 * sigma * sigma))


def hsic_gaussian(x, y) -> float:
    """Biased HSIC ``Tr(K H L H) / n^2`` with per-block median bandwidths."""
    x, y = _pair(x, y)
    n = x.shape[0]
    if n < 2:
        raise ValueError("HSIC needs n >= 2")
    k = gaussian_gram(x, kernel_bandwidth(x))
    l = gaussian_gram(y, kernel_bandwidth(y))
    # Tr(K H L H) = sum(Kc * Lc) with Kc = H K H, both symmetric
    return float((double_center(k) * double_center(l)).sum() / (n * n))
