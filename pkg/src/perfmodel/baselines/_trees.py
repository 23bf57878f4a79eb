"""Regression trees, bagged forests, and gradient boosting from first principles.

All trees use variance-reduction splits with midpoint thresholds; the split
search runs in the compiled kernel layer. Feature subsets and bootstrap rows
come from numpy Generators, so every fit is reproducible from its seed.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .. import kernels


class Tree:
    """Flat-array binary regression tree (preorder node layout)."""

    __slots__ = ("feature", "threshold", "left", "right", "value", "importance")

    def __init__(self, n_features: int):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.importance = np.zeros(n_features, dtype=np.float64)

    def _add_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def predict(self, x: np.ndarray) -> np.ndarray:
        out = np.empty(x.shape[0], dtype=np.float64)
        for i in range(x.shape[0]):
            node = 0
            while self.feature[node] >= 0:
                if x[i, self.feature[node]] <= self.threshold[node]:
                    node = self.left[node]
                else:
                    node = self.right[node]
            out[i] = self.value[node]
        return out

    @property
    def n_leaves(self) -> int:
        return sum(1 for f in self.feature if f < 0)


def grow_tree(
    x: np.ndarray,
    y: np.ndarray,
    min_leaf: int,
    max_depth: int | None,
    choose_features: Callable[[], np.ndarray] | None = None,
) -> Tree:
    """Grow a tree greedily; min_leaf bounds both children of every split.

    choose_features (when given) supplies the candidate feature indices for
    each node in preorder, which is how forests randomize per-split features.
    max_depth=None grows to purity/min_leaf limits; max_depth=0 is one leaf.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    p = x.shape[1]
    all_features = np.arange(p, dtype=np.int64)
    tree = Tree(p)

    def build(rows: np.ndarray, depth: int) -> int:
        node = tree._add_node()
        yr = y[rows]
        depth_stop = max_depth is not None and depth >= max_depth
        if depth_stop or rows.size < 2 * min_leaf or np.all(yr == yr[0]):
            tree.value[node] = float(yr.mean())
            return node
        feats = choose_features() if choose_features is not None else all_features
        feat, thresh, gain, _ = kernels.best_split(
            x[rows], y[rows], np.asarray(feats, dtype=np.int64), min_leaf
        )
        if feat < 0 or gain <= 0.0:
            tree.value[node] = float(yr.mean())
            return node
        tree.importance[feat] += gain
        tree.feature[node] = int(feat)
        tree.threshold[node] = float(thresh)
        mask = x[rows, feat] <= thresh
        tree.left[node] = build(rows[mask], depth + 1)
        tree.right[node] = build(rows[~mask], depth + 1)
        return node

    build(np.arange(x.shape[0]), 0)
    return tree


class TreeState:
    """Fitted CART state."""

    def __init__(self, tree: Tree):
        self.tree = tree

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.tree.predict(x)

    @property
    def importance(self) -> np.ndarray:
        return self.tree.importance


def fit_cart(x: np.ndarray, y: np.ndarray, max_depth: int, min_leaf: int) -> TreeState:
    return TreeState(grow_tree(x, y, min_leaf=min_leaf, max_depth=max_depth))


def _resolve_max_features(max_features, p: int) -> int:
    if max_features == "all":
        return p
    if max_features == "sqrt":
        return max(1, int(round(np.sqrt(p))))
    return min(int(max_features), p)


class ForestState:
    """Fitted random-forest state: a list of trees averaged at predict time."""

    def __init__(self, trees: Sequence[Tree]):
        self.trees = list(trees)

    def predict(self, x: np.ndarray) -> np.ndarray:
        preds = np.stack([t.predict(x) for t in self.trees])
        return np.mean(preds, axis=0)

    @property
    def importance(self) -> np.ndarray:
        total = np.zeros_like(self.trees[0].importance)
        for t in self.trees:
            total += t.importance
        return total


def fit_forest(
    x: np.ndarray,
    y: np.ndarray,
    n_trees: int,
    max_features,
    min_leaf: int,
    seed: int,
    bootstrap: bool = True,
) -> ForestState:
    """Bagged trees with per-split feature subsets.

    Each tree gets an independent child generator of the seed, drawing its
    bootstrap rows first and then one feature subset per node in preorder.
    bootstrap=False trains every tree on the full row set (used to check that
    a single full-featured tree equals a plain CART).
    """
    n, p = x.shape
    mf = _resolve_max_features(max_features, p)
    seeds = np.random.SeedSequence(int(seed)).spawn(n_trees)
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(seeds[t])
        rows = rng.integers(0, n, size=n) if bootstrap else np.arange(n)

        def choose() -> np.ndarray:
            if mf >= p:
                return np.arange(p, dtype=np.int64)
            return np.sort(rng.choice(p, size=mf, replace=False)).astype(np.int64)

        trees.append(grow_tree(x[rows], y[rows], min_leaf=min_leaf, max_depth=None, choose_features=choose))
    return ForestState(trees)


class BoostState:
    """Fitted gradient-boosting state: base value plus shrunk residual trees."""

    def __init__(self, base: float, shrinkage: float, trees: Sequence[Tree], staged_rmse: Sequence[float]):
        self.base = base
        self.shrinkage = shrinkage
        self.trees = list(trees)
        self.staged_rmse = tuple(staged_rmse)

    def predict(self, x: np.ndarray) -> np.ndarray:
        pred = np.full(x.shape[0], self.base, dtype=np.float64)
        for t in self.trees:
            pred += self.shrinkage * t.predict(x)
        return pred

    @property
    def importance(self) -> np.ndarray:
        total = np.zeros_like(self.trees[0].importance)
        for t in self.trees:
            total += t.importance
        return total


def fit_boosting(
    x: np.ndarray,
    y: np.ndarray,
    n_rounds: int,
    shrinkage: float,
    subsample: float,
    max_depth: int,
    seed: int,
) -> BoostState:
    """Sequential residual trees with shrinkage and row subsampling.

    Rounds are deterministic given the seed: the round's rows (when
    subsample < 1) are one sorted without-replacement draw. Training RMSE is
    recorded after every round.
    """
    n = x.shape[0]
    rng = np.random.default_rng(int(seed))
    base = float(y.mean())
    pred = np.full(n, base, dtype=np.float64)
    trees = []
    staged = []
    for _ in range(n_rounds):
        resid = y - pred
        if subsample < 1.0:
            k = max(1, int(np.floor(subsample * n)))
            rows = np.sort(rng.choice(n, size=k, replace=False))
        else:
            rows = np.arange(n)
        tree = grow_tree(x[rows], resid[rows], min_leaf=1, max_depth=max_depth)
        trees.append(tree)
        pred = pred + shrinkage * tree.predict(x)
        staged.append(float(np.sqrt(np.mean((y - pred) ** 2))))
    return BoostState(base, shrinkage, trees, staged)
