"""Rank correlation, PCA, correlation grouping, and density summaries.

These are the statistical primitives behind counter selection, what-if
propagation, and report distributions. All functions are pure; inputs are
never mutated.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .dataset import Dataset
from .errors import DegenerateInputError, DimensionError, UnknownColumnError, ValidationError

# sentinel for correlations that do not exist (constant input)
UNDEFINED = float("nan")


def spearman(x: np.ndarray, y: np.ndarray) -> float:
    """Spearman rank correlation with average ranks for ties.

    Returns NaN when either vector is constant (the correlation is undefined;
    counter selection treats that as zero relevance).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise DimensionError(f"expected equal-length vectors, got {x.shape} and {y.shape}")
    if x.size < 3:
        raise DimensionError(f"need at least 3 observations, got {x.size}")
    rx = kernels.rank_average(x)
    ry = kernels.rank_average(y)
    sx = rx - rx.mean()
    sy = ry - ry.mean()
    denom = math.sqrt(float(sx @ sx) * float(sy @ sy))
    if denom == 0.0:
        return UNDEFINED
    return float(sx @ sy) / denom


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric pairwise Spearman matrix over named columns.

    Undefined pairs (a constant column involved) hold 0.0 in ``rho`` and
    False in ``defined``; the diagonal is fixed at 1.
    """

    names: tuple[str, ...]
    rho: np.ndarray
    defined: np.ndarray

    def __post_init__(self):
        k = len(self.names)
        if self.rho.shape != (k, k) or self.defined.shape != (k, k):
            raise DimensionError("matrix shape does not match the name list")

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownColumnError(f"unknown column {name!r}") from None

    def value(self, a: str, b: str) -> float:
        return float(self.rho[self.index(a), self.index(b)])

    def is_defined(self, a: str, b: str) -> bool:
        return bool(self.defined[self.index(a), self.index(b)])


def spearman_matrix(d: Dataset, columns: Sequence[str]) -> CorrelationMatrix:
    """Pairwise Spearman over the named dataset columns (counters/targets/frequency)."""
    if d.n < 3:
        raise DimensionError(f"need at least 3 samples, got {d.n}")
    names = tuple(columns)
    ranks = np.column_stack([kernels.rank_average(d.column(c)) for c in names])
    k = len(names)
    sd = ranks.std(axis=0)
    centered = ranks - ranks.mean(axis=0)
    rho = np.eye(k)
    defined = np.ones((k, k), dtype=bool)
    for i in range(k):
        for j in range(i + 1, k):
            denom = math.sqrt(float(centered[:, i] @ centered[:, i]) * float(centered[:, j] @ centered[:, j]))
            if sd[i] == 0.0 or sd[j] == 0.0 or denom == 0.0:
                defined[i, j] = defined[j, i] = False
                continue
            r = float(centered[:, i] @ centered[:, j]) / denom
            r = min(1.0, max(-1.0, r))
            rho[i, j] = rho[j, i] = r
    return CorrelationMatrix(names, rho, defined)


def correlation_groups(m: CorrelationMatrix, tau: float) -> list[tuple[str, ...]]:
    """Connected components of the |rho| >= tau graph; a partition of m.names.

    Groups are ordered by their first member's position in m.names, members
    in name-list order.
    """
    if not 0.0 < tau <= 1.0:
        raise ValidationError(f"tau must be in (0, 1], got {tau}")
    k = len(m.names)
    parent = list(range(k))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(k):
        for j in range(i + 1, k):
            if m.defined[i, j] and abs(m.rho[i, j]) >= tau:
                ra, rb = find(i), find(j)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)

    groups: dict[int, list[str]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(m.names[i])
    return [tuple(groups[r]) for r in sorted(groups)]


@dataclass(frozen=True)
class PcaResult:
    """Eigendecomposition of the correlation matrix of standardized columns.

    ``components`` holds one orthonormal loading vector per row, covering the
    full basis; ``n_retained`` is how many rows are needed to reach the
    variance target. ``dropped`` lists zero-variance columns excluded before
    the decomposition.
    """

    columns: tuple[str, ...]
    dropped: tuple[str, ...]
    components: np.ndarray
    eigenvalues: np.ndarray
    explained_variance_ratio: np.ndarray
    n_retained: int
    variance_target: float
    means: np.ndarray
    sds: np.ndarray

    def standardize(self, x: np.ndarray) -> np.ndarray:
        """Apply the training standardization to a matrix over self.columns."""
        return (np.asarray(x, dtype=np.float64) - self.means) / self.sds


def pca(d: Dataset, columns: Sequence[str], variance_target: float = 0.9) -> PcaResult:
    """PCA of the named columns via the correlation matrix.

    Columns are standardized with sample (ddof=1) variance; zero-variance
    columns are dropped with a warning. n_retained is the smallest component
    count whose cumulative explained-variance ratio reaches variance_target.
    """
    if not 0.0 < variance_target <= 1.0:
        raise ValidationError(f"variance_target must be in (0, 1], got {variance_target}")
    if len(columns) < 1:
        raise DimensionError("need at least one column")
    if d.n < 2:
        raise DimensionError(f"need at least 2 samples, got {d.n}")
    names = tuple(columns)
    x = d.matrix(names)
    means = x.mean(axis=0)
    sds = x.std(axis=0, ddof=1)
    keep = sds > 0.0
    dropped = tuple(n for n, k in zip(names, keep) if not k)
    if dropped:
        if not np.any(keep):
            raise DegenerateInputError("all columns have zero variance")
        warnings.warn(f"dropping zero-variance column(s) from PCA: {list(dropped)}")
    kept = tuple(n for n, k in zip(names, keep) if k)
    z = (x[:, keep] - means[keep]) / sds[keep]
    corr = (z.T @ z) / (d.n - 1)
    eigvals, eigvecs = np.linalg.eigh(corr)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    components = eigvecs[:, order].T  # row k = k-th loading vector
    total = float(eigvals.sum())
    ratios = eigvals / total if total > 0 else np.zeros_like(eigvals)
    cumulative = np.cumsum(ratios)
    n_retained = int(np.searchsorted(cumulative, variance_target - 1e-12) + 1)
    n_retained = min(n_retained, len(kept))
    return PcaResult(
        columns=kept,
        dropped=dropped,
        components=components,
        eigenvalues=eigvals,
        explained_variance_ratio=ratios,
        n_retained=n_retained,
        variance_target=variance_target,
        means=means[keep],
        sds=sds[keep],
    )


@dataclass(frozen=True)
class DensityCurve:
    """Gaussian KDE of a sample plus its quartiles and range.

    The numeric substrate for violin-style rendering: grid, density values,
    bandwidth, quartiles, and min/max.
    """

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    q1: float
    median: float
    q3: float
    min_value: float
    max_value: float

    def to_dict(self) -> dict:
        return {
            "grid": [float(g) for g in self.grid],
            "density": [float(v) for v in self.density],
            "bandwidth": float(self.bandwidth),
            "quartiles": {"q1": self.q1, "median": self.median, "q3": self.q3},
            "min": self.min_value,
            "max": self.max_value,
        }


GRID_POINTS = 512


def kde(values: np.ndarray) -> DensityCurve:
    """Gaussian kernel density estimate with Silverman's rule bandwidth.

    h = 0.9 * min(sd, IQR/1.34) * n^(-1/5), with the IQR term skipped when it
    is zero. The density is evaluated on a 512-point grid spanning
    [min - 3h, max + 3h]; quartiles use linear interpolation.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size < 2:
        raise DimensionError("need a vector of at least 2 values")
    if np.all(values == values[0]):
        raise DegenerateInputError("all values equal; density is a point mass")
    n = values.size
    sd = float(values.std(ddof=1))
    q1, median, q3 = (float(q) for q in np.percentile(values, [25, 50, 75]))
    iqr = q3 - q1
    scale = min(sd, iqr / 1.34) if iqr > 0 else sd
    h = 0.9 * scale * n ** (-1.0 / 5.0)
    lo = float(values.min()) - 3.0 * h
    hi = float(values.max()) + 3.0 * h
    grid = np.linspace(lo, hi, GRID_POINTS)
    density = kernels.kde_density(values, grid, h)
    return DensityCurve(
        grid=grid,
        density=density,
        bandwidth=h,
        q1=q1,
        median=median,
        q3=q3,
        min_value=float(values.min()),
        max_value=float(values.max()),
    )
