"""Nonnegative least squares: planted recovery, KKT certificates, edge cases.

Oracle strategy: plant x* >= 0, set b = A x* (+ noise), and verify recovery
plus first-order optimality. For problems whose unconstrained optimum is
already nonnegative, NNLS must match ordinary least squares.
"""

import numpy as np
import pytest

from perfmodel.errors import DimensionError
from perfmodel.nnls import kkt_violation, nnls, nnls_with_intercept


def planted_problem(rng, m, n, sparsity=0.5, noise=0.0):
    a = rng.normal(size=(m, n))
    x = rng.uniform(0.5, 3.0, size=n)
    x[rng.random(n) < sparsity] = 0.0
    b = a @ x + noise * rng.normal(size=m)
    return a, b, x


def test_recovers_planted_noiseless():
    rng = np.random.default_rng(0)
    for _ in range(30):
        m = int(rng.integers(20, 120))
        n = int(rng.integers(1, 12))
        a, b, want = planted_problem(rng, m, n)
        got = nnls(a, b)
        assert np.allclose(got, want, rtol=1e-6, atol=1e-8)
        assert kkt_violation(a, b, got) <= 1e-8


def test_matches_ols_when_unconstrained_optimum_feasible():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(60, 5))
    x = rng.uniform(1.0, 2.0, size=5)  # all strictly positive
    b = a @ x + 0.01 * rng.normal(size=60)
    ols, *_ = np.linalg.lstsq(a, b, rcond=None)
    if ols.min() > 0:  # holds for this seed; guards the oracle's premise
        assert np.allclose(nnls(a, b), ols, rtol=1e-10, atol=1e-12)


def test_negative_unconstrained_optimum_is_clamped():
    # one column anti-correlated with b: its coefficient must pin at 0
    rng = np.random.default_rng(2)
    a = rng.normal(size=(80, 3))
    b = 2.0 * a[:, 0] - 5.0 * a[:, 1]  # x1 would be negative unconstrained
    x = nnls(a, b)
    assert x[1] == 0.0
    assert np.all(x >= 0.0)
    assert kkt_violation(a, b, x) <= 1e-8


def test_zero_rhs_gives_zero_solution():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(10, 4))
    assert np.array_equal(nnls(a, np.zeros(10)), np.zeros(4))


def test_rank_deficient_still_optimal():
    rng = np.random.default_rng(4)
    base = rng.normal(size=(40, 2))
    a = np.column_stack([base, base[:, 0] + base[:, 1]])  # exact collinearity
    b = a @ np.array([1.0, 2.0, 0.5])
    x = nnls(a, b)
    assert np.all(x >= 0.0)
    # any optimum reproduces the fit even if coefficients are not unique
    assert np.allclose(a @ x, b, atol=1e-8)
    assert kkt_violation(a, b, x) <= 1e-8


def test_shape_validation():
    with pytest.raises(DimensionError):
        nnls(np.zeros((3, 2)), np.zeros(4))
    with pytest.raises(DimensionError):
        nnls(np.zeros(3), np.zeros(3))
    with pytest.raises(DimensionError):
        nnls_with_intercept(np.zeros((3, 2)), np.zeros(4))


def test_kkt_flags_suboptimal_points():
    rng = np.random.default_rng(5)
    a, b, want = planted_problem(rng, 50, 6, sparsity=0.0)
    assert kkt_violation(a, b, want) <= 1e-10
    bad = want.copy()
    bad[0] += 1.0
    assert kkt_violation(a, b, bad) > 1e-4


# --- intercept variant ---------------------------------------------------------


def test_intercept_recovery():
    rng = np.random.default_rng(6)
    for _ in range(20):
        m = int(rng.integers(15, 80))
        n = int(rng.integers(1, 8))
        a = rng.uniform(0.0, 5.0, size=(m, n))
        want = rng.uniform(0.0, 2.0, size=n)
        want_b0 = rng.uniform(-10.0, 10.0)  # intercept may be negative
        b = a @ want + want_b0
        coefs, b0, non_unique = nnls_with_intercept(a, b)
        assert not non_unique
        assert np.allclose(coefs, want, rtol=1e-6, atol=1e-7)
        assert b0 == pytest.approx(want_b0, rel=1e-6, abs=1e-7)


def test_intercept_only_problem():
    a = np.zeros((10, 0))
    b = np.full(10, 7.5)
    coefs, b0, non_unique = nnls_with_intercept(a, b)
    assert coefs.shape == (0,)
    assert b0 == pytest.approx(7.5)
    assert not non_unique


def test_intercept_equals_mean_residual_identity():
    rng = np.random.default_rng(7)
    a = rng.uniform(0.0, 3.0, size=(30, 4))
    b = rng.uniform(1.0, 10.0, size=30)
    coefs, b0, _ = nnls_with_intercept(a, b)
    assert b0 == pytest.approx(float(b.mean() - a.mean(axis=0) @ coefs), abs=1e-12)
    # centered-system optimality transfers to the intercept model: residual
    # correlation with a column must vanish when its coefficient is positive
    # and cannot be positive when the coefficient is pinned at zero
    resid = b - (a @ coefs + b0)
    g = (a - a.mean(axis=0)).T @ resid
    scale = max(1.0, float(np.abs((a - a.mean(axis=0)).T @ (b - b.mean())).max()))
    assert np.all(np.abs(g[coefs > 0]) / scale <= 1e-8)
    assert np.all(g[coefs == 0] / scale <= 1e-8)
    # residual mean is zero because the intercept absorbs it
    assert float(resid.mean()) == pytest.approx(0.0, abs=1e-10)


def test_non_unique_flag_on_duplicate_columns():
    rng = np.random.default_rng(8)
    col = rng.uniform(0.0, 1.0, size=25)
    a = np.column_stack([col, col])
    b = 3.0 * col + 1.0
    coefs, b0, non_unique = nnls_with_intercept(a, b)
    assert non_unique
    # the fitted surface is still exact even though the split is arbitrary
    assert np.allclose(a @ coefs + b0, b, atol=1e-8)


def test_noise_robust_recovery():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(20):
        a, b, want = planted_problem(rng, 150, 8, sparsity=0.3, noise=0.01)
        got = nnls(a, b)
        assert kkt_violation(a, b, got) <= 1e-8
        worst = max(worst, float(np.max(np.abs(got - want))))
    assert worst <= 5e-2
