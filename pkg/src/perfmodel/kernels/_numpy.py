"""Pure-numpy kernel implementations (fallback backend).

Tie-breaking and accumulation order in ``rank_average`` and ``best_split``
match the numba backend bit for bit: cumulative sums are sequential, and
argmax-style scans keep the first maximum.
"""

import numpy as np


def rank_average(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the average of their positions."""
    a = np.ascontiguousarray(values, dtype=np.float64)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.float64)
    order = np.argsort(a, kind="mergesort")
    sv = a[order]
    # group boundaries of equal runs in the sorted array
    starts_inner = np.flatnonzero(sv[1:] != sv[:-1]) + 1
    starts = np.concatenate(([0], starts_inner))
    ends = np.concatenate((starts_inner, [n]))
    avg = (starts + (ends - 1)) / 2.0 + 1.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.repeat(avg, ends - starts)
    return ranks


def best_split(
    x: np.ndarray, y: np.ndarray, feature_indices: np.ndarray, min_leaf: int
) -> tuple[int, float, float, float]:
    """Best variance-reduction split over the given feature columns.

    Returns ``(feature, threshold, sse_reduction, parent_sse)``; feature is -1
    when no split satisfies ``min_leaf`` on both sides. Ties keep the first
    feature in ``feature_indices`` order and the lowest threshold within a
    feature.
    """
    n = y.shape[0]
    best_feat = -1
    best_thresh = 0.0
    best_gain = -np.inf
    parent_sse = 0.0
    first = True
    if n < 2 * min_leaf:
        return -1, 0.0, 0.0, 0.0
    for f in feature_indices:
        col = x[:, f]
        order = np.argsort(col, kind="mergesort")
        xs = col[order]
        ys = y[order]
        c1 = np.cumsum(ys)
        c2 = np.cumsum(ys * ys)
        t1 = c1[-1]
        t2 = c2[-1]
        f_parent = t2 - t1 * t1 / n
        if first:
            parent_sse = float(f_parent)
            first = False
        i = np.arange(min_leaf - 1, n - min_leaf)
        valid = xs[i] != xs[i + 1]
        if not np.any(valid):
            continue
        i = i[valid]
        nl = (i + 1).astype(np.float64)
        nr = n - nl
        sse_l = c2[i] - c1[i] * c1[i] / nl
        sse_r = (t2 - c2[i]) - (t1 - c1[i]) * (t1 - c1[i]) / nr
        gains = f_parent - sse_l - sse_r
        k = int(np.argmax(gains))
        if gains[k] > best_gain:
            best_gain = float(gains[k])
            best_feat = int(f)
            j = int(i[k])
            best_thresh = (xs[j] + xs[j + 1]) / 2.0
    if best_feat < 0:
        return -1, 0.0, 0.0, parent_sse
    return best_feat, float(best_thresh), best_gain, parent_sse


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows of ``a`` and rows of ``b``."""
    a2 = np.sum(a * a, axis=1)
    b2 = np.sum(b * b, axis=1)
    d = a2[:, None] + b2[None, :] - 2.0 * (a @ b.T)
    np.maximum(d, 0.0, out=d)
    return d


def kde_density(values: np.ndarray, grid: np.ndarray, bandwidth: float) -> np.ndarray:
    """Gaussian kernel density of ``values`` evaluated on ``grid``."""
    u = (grid[:, None] - values[None, :]) / bandwidth
    dens = np.exp(-0.5 * u * u).sum(axis=1)
    dens /= values.shape[0] * bandwidth * np.sqrt(2.0 * np.pi)
    return dens
