"""Six reference regression methods with a uniform fit/predict/tune surface.

Methods: ridge, knn, cart, random_forest, gradient_boosting, gp_rbf. Each is
deterministic given (data, hyperparams, seed). Tree methods additionally
expose split-gain variable importance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..dataset import FREQ_COLUMN, CounterSample, Dataset
from ..errors import (
    InputError,
    UnknownColumnError,
    UnsupportedMethodError,
    ValidationError,
)
from ._simple import fit_gp, fit_knn, fit_ridge
from ._trees import fit_boosting, fit_cart, fit_forest

METHODS = ("ridge", "knn", "cart", "random_forest", "gradient_boosting", "gp_rbf")

TREE_METHODS = ("cart", "random_forest", "gradient_boosting")

_DEFAULTS: dict[str, dict] = {
    "ridge": {"lambda": 1.0},
    "knn": {"k": 5},
    "cart": {"max_depth": 8, "min_leaf": 2},
    "random_forest": {
        "n_trees": 30,
        "max_features": "sqrt",
        "min_leaf": 1,
        "seed": 0,
        "bootstrap": True,
    },
    "gradient_boosting": {
        "n_rounds": 150,
        "shrinkage": 0.1,
        "subsample": 1.0,
        "max_depth": 3,
        "seed": 0,
    },
    "gp_rbf": {"length_scale": 2.0, "noise_lambda": 1e-2},
}


def _check_method(method: str) -> None:
    if method not in METHODS:
        raise UnsupportedMethodError(
            f"unknown method {method!r}; valid methods: {', '.join(METHODS)}"
        )


def default_hyperparams(method: str) -> dict:
    _check_method(method)
    return dict(_DEFAULTS[method])


def _require(cond: bool, msg: str):
    if not cond:
        raise ValidationError(msg)


def validate_hyperparams(method: str, hp: Mapping | None = None) -> dict:
    """Merge hp over the method defaults and check every field's range."""
    _check_method(method)
    merged = {**_DEFAULTS[method], **dict(hp or {})}
    unknown = set(merged) - set(_DEFAULTS[method])
    if unknown:
        raise ValidationError(f"{method}: unknown hyperparameter(s) {sorted(unknown)}")
    if method == "ridge":
        _require(merged["lambda"] > 0, f"ridge: lambda must be > 0, got {merged['lambda']}")
    elif method == "knn":
        merged["k"] = int(merged["k"])
        _require(merged["k"] >= 1, f"knn: k must be >= 1, got {merged['k']}")
    elif method == "cart":
        merged["max_depth"] = int(merged["max_depth"])
        merged["min_leaf"] = int(merged["min_leaf"])
        _require(merged["max_depth"] >= 0, "cart: max_depth must be >= 0")
        _require(merged["min_leaf"] >= 1, "cart: min_leaf must be >= 1")
    elif method == "random_forest":
        merged["n_trees"] = int(merged["n_trees"])
        merged["min_leaf"] = int(merged["min_leaf"])
        _require(merged["n_trees"] >= 1, "random_forest: n_trees must be >= 1")
        _require(merged["min_leaf"] >= 1, "random_forest: min_leaf must be >= 1")
        mf = merged["max_features"]
        if isinstance(mf, str):
            _require(mf in ("all", "sqrt"), f"random_forest: max_features string must be 'all' or 'sqrt', got {mf!r}")
        else:
            merged["max_features"] = int(mf)
            _require(merged["max_features"] >= 1, "random_forest: max_features must be >= 1")
        merged["bootstrap"] = bool(merged["bootstrap"])
    elif method == "gradient_boosting":
        merged["n_rounds"] = int(merged["n_rounds"])
        merged["max_depth"] = int(merged["max_depth"])
        _require(merged["n_rounds"] >= 1, "gradient_boosting: n_rounds must be >= 1")
        _require(0 < merged["shrinkage"] <= 1, "gradient_boosting: shrinkage must be in (0, 1]")
        _require(0 < merged["subsample"] <= 1, "gradient_boosting: subsample must be in (0, 1]")
        _require(merged["max_depth"] >= 0, "gradient_boosting: max_depth must be >= 0")
    elif method == "gp_rbf":
        _require(merged["length_scale"] > 0, "gp_rbf: length_scale must be > 0")
        _require(merged["noise_lambda"] > 0, "gp_rbf: noise_lambda must be > 0")
    return merged


def default_grids() -> dict[str, list[dict]]:
    """Small cross-validation grids per method (the tuning search space)."""
    return {
        "ridge": [{"lambda": v} for v in (0.01, 0.1, 1.0, 10.0)],
        "knn": [{"k": k} for k in (1, 2, 4, 8)],
        "cart": [
            {"max_depth": d, "min_leaf": m} for d in (4, 8) for m in (1, 5)
        ],
        "random_forest": [
            {"n_trees": 30, "max_features": "sqrt"},
            {"n_trees": 30, "max_features": "all"},
        ],
        "gradient_boosting": [
            {"n_rounds": 150, "shrinkage": 0.1, "subsample": 1.0, "max_depth": 2},
            {"n_rounds": 150, "shrinkage": 0.1, "subsample": 0.8, "max_depth": 3},
        ],
        "gp_rbf": [
            {"length_scale": s, "noise_lambda": lam}
            for s in (1.0, 3.0)
            for lam in (1e-3, 1e-1)
        ],
    }


@dataclass(frozen=True)
class BaselineModel:
    """A fitted method: its features, target, hyperparams, and opaque state."""

    method: str
    target: str
    feature_names: tuple[str, ...]
    hyperparams: Mapping
    state: object


def default_features(train: Dataset) -> tuple[str, ...]:
    """All counters plus the CPU frequency."""
    return train.counter_names + (FREQ_COLUMN,)


def fit_baseline(
    method: str,
    train: Dataset,
    target: str,
    features: Sequence[str] | None = None,
    hp: Mapping | None = None,
) -> BaselineModel:
    """Fit one method on the named feature columns."""
    _check_method(method)
    canonical = validate_hyperparams(method, hp)
    names = tuple(features) if features is not None else default_features(train)
    if train.n < 3:
        raise InputError(f"need at least 3 samples, got {train.n}")
    x = train.matrix(names)
    y = train.column(target)
    if method == "ridge":
        state = fit_ridge(x, y, canonical["lambda"])
    elif method == "knn":
        state = fit_knn(x, y, canonical["k"])
    elif method == "cart":
        state = fit_cart(x, y, canonical["max_depth"], canonical["min_leaf"])
    elif method == "random_forest":
        state = fit_forest(
            x,
            y,
            n_trees=canonical["n_trees"],
            max_features=canonical["max_features"],
            min_leaf=canonical["min_leaf"],
            seed=canonical["seed"],
            bootstrap=canonical["bootstrap"],
        )
    elif method == "gradient_boosting":
        state = fit_boosting(
            x,
            y,
            n_rounds=canonical["n_rounds"],
            shrinkage=canonical["shrinkage"],
            subsample=canonical["subsample"],
            max_depth=canonical["max_depth"],
            seed=canonical["seed"],
        )
    else:
        state = fit_gp(x, y, canonical["length_scale"], canonical["noise_lambda"])
    return BaselineModel(method, target, names, canonical, state)


def _sample_vector(sample: CounterSample, names: Sequence[str]) -> np.ndarray:
    vals = []
    for n in names:
        if n in sample.counters:
            vals.append(sample.counters[n])
        elif n == FREQ_COLUMN:
            vals.append(sample.cpu_freq_ghz)
        elif n in sample.config_params:
            vals.append(sample.config_params[n])
        else:
            raise UnknownColumnError(f"sample is missing feature {n!r}")
    return np.array(vals, dtype=np.float64)


def predict_baseline(m: BaselineModel, sample: CounterSample) -> float:
    return float(m.state.predict(_sample_vector(sample, m.feature_names)[None, :])[0])


def predict_baseline_dataset(m: BaselineModel, d: Dataset) -> np.ndarray:
    return m.state.predict(d.matrix(m.feature_names))


def tune(
    method: str,
    train: Dataset,
    target: str,
    features: Sequence[str] | None,
    grid: Sequence[Mapping],
    folds: int,
    seed: int,
) -> dict:
    """Pick the grid point with the lowest mean k-fold CV RMSE.

    Folds are contiguous blocks of a seeded shuffle, so the same seed always
    builds the same folds. Ties keep the earliest grid entry. The returned
    hyperparams are canonical (defaults filled in).
    """
    if not grid:
        raise InputError("hyperparameter grid is empty")
    if folds < 2 or folds > train.n:
        raise InputError(f"folds must be in [2, {train.n}], got {folds}")
    perm = np.random.default_rng(int(seed)).permutation(train.n)
    blocks = np.array_split(perm, folds)
    best_hp: dict | None = None
    best_rmse = math.inf
    for hp in grid:
        canonical = validate_hyperparams(method, hp)
        fold_rmses = []
        for b in range(folds):
            val_idx = np.sort(blocks[b])
            tr_idx = np.sort(np.concatenate([blocks[j] for j in range(folds) if j != b]))
            model = fit_baseline(method, train.subset(tr_idx), target, features, canonical)
            preds = predict_baseline_dataset(model, train.subset(val_idx))
            actual = train.subset(val_idx).column(target)
            fold_rmses.append(float(np.sqrt(np.mean((preds - actual) ** 2))))
        rmse = float(np.mean(fold_rmses))
        if rmse < best_rmse:
            best_rmse = rmse
            best_hp = canonical
    assert best_hp is not None
    return best_hp


@dataclass(frozen=True)
class ImportanceReport:
    """Per-feature scores, largest first; semantics depend on score_kind."""

    method: str
    score_kind: str
    entries: tuple[tuple[str, float], ...]

    def to_list(self) -> list[dict]:
        return [{"feature": f, "score": s} for f, s in self.entries]


def importance(m: BaselineModel, train: Dataset) -> ImportanceReport:
    """Total training squared-error reduction per feature over all splits.

    Only tree methods carry split records; other methods raise. Features the
    trees never split on appear with score 0.
    """
    if m.method not in TREE_METHODS:
        raise UnsupportedMethodError(
            f"importance is defined for tree methods {TREE_METHODS}, not {m.method!r}"
        )
    for name in m.feature_names:
        train.column(name)  # raises UnknownColumnError on schema mismatch
    scores = m.state.importance
    pairs = sorted(zip(m.feature_names, scores), key=lambda p: (-p[1], p[0]))
    return ImportanceReport(
        method=m.method,
        score_kind="sse_reduction",
        entries=tuple((f, float(s)) for f, s in pairs),
    )
