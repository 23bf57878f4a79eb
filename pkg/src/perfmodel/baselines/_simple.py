"""Ridge regression, k-nearest neighbors, and RBF kernel ridge (GP form).

All three standardize features with the training mean/sd; zero-variance
features get sd 1 so they contribute nothing instead of dividing by zero.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import NumericError


class Standardizer:
    def __init__(self, x: np.ndarray):
        self.means = x.mean(axis=0)
        sds = x.std(axis=0)
        self.sds = np.where(sds == 0.0, 1.0, sds)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.means) / self.sds


class RidgeState:
    """Closed-form ridge fit; coefficients exposed in original feature scale."""

    def __init__(self, coef: np.ndarray, intercept: float):
        self.coef = coef
        self.intercept = intercept

    def predict(self, x: np.ndarray) -> np.ndarray:
        return x @ self.coef + self.intercept


def fit_ridge(x: np.ndarray, y: np.ndarray, lam: float) -> RidgeState:
    """Penalized least squares on standardized features, intercept unpenalized.

    Standardizing centers the columns, which decouples the intercept: it is
    mean(y) in standardized space, and the penalty never touches it.
    """
    std = Standardizer(x)
    z = std.apply(x)
    p = z.shape[1]
    a = z.T @ z + lam * np.eye(p)
    b = z.T @ (y - y.mean())
    try:
        beta = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as e:
        raise NumericError(
            f"ridge system is singular (lambda={lam}); the design is too ill-conditioned"
        ) from e
    coef = beta / std.sds
    intercept = float(y.mean() - std.means @ coef)
    return RidgeState(coef, intercept)


class KnnState:
    def __init__(self, z: np.ndarray, y: np.ndarray, k: int, std: Standardizer):
        self.z = z
        self.y = y
        self.k = k
        self.std = std

    def predict(self, x: np.ndarray) -> np.ndarray:
        zq = self.std.apply(x)
        d = kernels.pairwise_sq_dists(zq, self.z)
        k = min(self.k, self.z.shape[0])
        out = np.empty(x.shape[0], dtype=np.float64)
        for i in range(x.shape[0]):
            order = np.argsort(d[i], kind="stable")
            out[i] = float(self.y[order[:k]].mean())
        return out


def fit_knn(x: np.ndarray, y: np.ndarray, k: int) -> KnnState:
    """Store the standardized training set; k is clamped to the sample count."""
    std = Standardizer(x)
    return KnnState(std.apply(x), np.asarray(y, dtype=np.float64), int(k), std)


class GpState:
    """RBF kernel ridge form: prediction = k(x,*)^T (K + lambda I)^(-1) y."""

    def __init__(self, z: np.ndarray, alpha: np.ndarray, length_scale: float, std: Standardizer):
        self.z = z
        self.alpha = alpha
        self.length_scale = length_scale
        self.std = std

    def predict(self, x: np.ndarray) -> np.ndarray:
        zq = self.std.apply(x)
        d = kernels.pairwise_sq_dists(zq, self.z)
        kq = np.exp(-d / (2.0 * self.length_scale**2))
        return kq @ self.alpha


def fit_gp(x: np.ndarray, y: np.ndarray, length_scale: float, noise_lambda: float) -> GpState:
    std = Standardizer(x)
    z = std.apply(x)
    d = kernels.pairwise_sq_dists(z, z)
    k = np.exp(-d / (2.0 * length_scale**2))
    a = k + noise_lambda * np.eye(z.shape[0])
    try:
        alpha = np.linalg.solve(a, np.asarray(y, dtype=np.float64))
    except np.linalg.LinAlgError as e:
        raise NumericError(
            f"GP system is singular (length_scale={length_scale}, "
            f"noise_lambda={noise_lambda}); increase noise_lambda to improve conditioning"
        ) from e
    return GpState(z, alpha, float(length_scale), std)
