"""Nonnegative least squares via the Lawson-Hanson active-set method.

Solves min ||A x - b||^2 subject to x >= 0. The intercept variant centers the
design and response first, which leaves the intercept unconstrained while
keeping every other coefficient nonnegative.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NumericError

DUAL_TOL = 1e-10


def nnls(a: np.ndarray, b: np.ndarray, tol: float = DUAL_TOL, max_iter: int | None = None) -> np.ndarray:
    """Solve min ||a @ x - b||^2 with x >= 0.

    Active-set iteration: repeatedly move the variable with the largest
    positive dual (negative gradient) into the passive set, solving the
    unconstrained least-squares subproblem and stepping back to the feasible
    boundary whenever the subproblem solution leaves the positive orthant.
    Rank-deficient designs are handled by the minimum-norm subproblem solve;
    the result is then one of several optima.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
        raise DimensionError(f"incompatible shapes {a.shape} and {b.shape}")
    m, n = a.shape
    if max_iter is None:
        max_iter = 3 * max(n, 10)

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = a.T @ (b - a @ x)
    scale = max(1.0, float(np.abs(a.T @ b).max())) if n else 1.0

    outer = 0
    while not passive.all() and np.any(w[~passive] > tol * scale):
        outer += 1
        if outer > max_iter:
            raise NumericError("active-set iteration failed to converge")
        candidates = np.where(~passive, w, -np.inf)
        j = int(np.argmax(candidates))
        passive[j] = True

        while True:
            idx = np.flatnonzero(passive)
            z, *_ = np.linalg.lstsq(a[:, idx], b, rcond=None)
            if z.min() > 0.0:
                x[:] = 0.0
                x[idx] = z
                break
            # step back along (z - x) until the first passive variable hits 0
            xp = x[idx]
            neg = z <= 0.0
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(neg, xp / (xp - z), np.inf)
            alpha = float(ratios.min())
            x[idx] = xp + alpha * (z - xp)
            hit = idx[x[idx] <= 1e-14 * max(1.0, float(np.abs(x).max()))]
            x[hit] = 0.0
            passive[hit] = False
            if not passive.any():
                x[:] = 0.0
                break
        w = a.T @ (b - a @ x)
    return x


def kkt_violation(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> float:
    """Worst relative violation of the NNLS optimality conditions.

    With g = A^T (A x - b): coefficients above zero need g ~ 0, coefficients
    at zero need g >= 0. Returns max(violation) / max(1, |A^T b|_inf), so a
    value <= 1e-8 certifies optimality at that relative tolerance.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    g = a.T @ (a @ x - b)
    scale = max(1.0, float(np.abs(a.T @ b).max())) if a.shape[1] else 1.0
    active = x <= 0.0
    viol_active = float(np.max(-g[active], initial=0.0))  # need g >= 0
    viol_passive = float(np.max(np.abs(g[~active]), initial=0.0))  # need g == 0
    return max(viol_active, viol_passive, 0.0) / scale


def nnls_with_intercept(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float, bool]:
    """NNLS with an unconstrained intercept.

    Centering both sides makes the intercept implicit: solve NNLS on the
    centered system, then recover intercept = mean(b) - colmeans(a) @ coefs.
    Returns (coefficients, intercept, non_unique) where non_unique reports a
    rank-deficient centered design (several coefficient vectors attain the
    optimum; one is returned).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 1 or a.shape[0] != b.shape[0]:
        raise DimensionError(f"incompatible shapes {a.shape} and {b.shape}")
    col_means = a.mean(axis=0)
    ac = a - col_means
    bc = b - b.mean()
    coefs = nnls(ac, bc)
    intercept = float(b.mean() - col_means @ coefs)
    non_unique = bool(np.linalg.matrix_rank(ac) < a.shape[1]) if a.shape[1] else False
    return coefs, intercept, non_unique
