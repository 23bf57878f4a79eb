"""numba-compiled kernel implementations (default backend).

Loop-style twins of ``_numpy``; ``rank_average`` and ``best_split`` reproduce
the fallback's results bit for bit (same accumulation order, same first-max
tie rule).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def rank_average(values: np.ndarray) -> np.ndarray:
    a = np.asarray(values, dtype=np.float64)
    n = a.shape[0]
    ranks = np.empty(n, dtype=np.float64)
    if n == 0:
        return ranks
    order = np.argsort(a, kind="mergesort")
    i = 0
    while i < n:
        j = i
        while j + 1 < n and a[order[j + 1]] == a[order[i]]:
            j += 1
        r = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = r
        i = j + 1
    return ranks


@njit(cache=True)
def best_split(x, y, feature_indices, min_leaf):
    n = y.shape[0]
    best_feat = -1
    best_thresh = 0.0
    best_gain = -np.inf
    parent_sse = 0.0
    first = True
    if n < 2 * min_leaf:
        return -1, 0.0, 0.0, 0.0
    c1 = np.empty(n, dtype=np.float64)
    c2 = np.empty(n, dtype=np.float64)
    for fi in range(feature_indices.shape[0]):
        f = feature_indices[fi]
        col = x[:, f]
        order = np.argsort(col, kind="mergesort")
        s1 = 0.0
        s2 = 0.0
        for k in range(n):
            yv = y[order[k]]
            s1 += yv
            s2 += yv * yv
            c1[k] = s1
            c2[k] = s2
        t1 = c1[n - 1]
        t2 = c2[n - 1]
        f_parent = t2 - t1 * t1 / n
        if first:
            parent_sse = f_parent
            first = False
        for i in range(min_leaf - 1, n - min_leaf):
            if col[order[i]] == col[order[i + 1]]:
                continue
            nl = float(i + 1)
            nr = n - nl
            sse_l = c2[i] - c1[i] * c1[i] / nl
            sse_r = (t2 - c2[i]) - (t1 - c1[i]) * (t1 - c1[i]) / nr
            gain = f_parent - sse_l - sse_r
            if gain > best_gain:
                best_gain = gain
                best_feat = f
                best_thresh = (col[order[i]] + col[order[i + 1]]) / 2.0
    if best_feat < 0:
        return -1, 0.0, 0.0, parent_sse
    return best_feat, best_thresh, best_gain, parent_sse


@njit(cache=True)
def pairwise_sq_dists(a, b):
    n = a.shape[0]
    m = b.shape[0]
    d = a.shape[1]
    out = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        for j in range(m):
            s = 0.0
            for k in range(d):
                diff = a[i, k] - b[j, k]
                s += diff * diff
            out[i, j] = s
    return out


@njit(cache=True)
def kde_density(values, grid, bandwidth):
    g = grid.shape[0]
    n = values.shape[0]
    out = np.empty(g, dtype=np.float64)
    norm = n * bandwidth * np.sqrt(2.0 * np.pi)
    for i in range(g):
        s = 0.0
        for j in range(n):
            u = (grid[i] - values[j]) / bandwidth
            s += np.exp(-0.5 * u * u)
        out[i] = s / norm
    return out
