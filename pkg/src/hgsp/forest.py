"""Binary random forest: bagged Gini trees with random feature subsets per node."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 200
    max_depth: int | None = None
    min_leaf: int = 1
    features_per_split: int | None = None  # None: ceil(sqrt(d))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError(f"n_trees must be positive, got {self.n_trees}")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError(f"max_depth must be non-negative, got {self.max_depth}")
        if self.min_leaf < 1:
            raise ValueError(f"min_leaf must be positive, got {self.min_leaf}")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError(f"features_per_split must be positive, got {self.features_per_split}")


def gini(n_pos, n):
    """Gini impurity of a node with ``n_pos`` positives out of ``n``."""
    p = n_pos / n
    return 2.0 * p * (1.0 - p)


def best_split(x, y, min_leaf=1):
    """Best threshold on one feature by weighted child Gini.

    Returns ``(impurity, threshold)``, or None when no split leaves
    ``min_leaf`` samples on both sides. Samples with ``x <= threshold`` go left.
    """
    n = x.shape[0]
    order = np.argsort(x, kind="stable")
    xs = x[order]
    pos_left = np.cumsum(y[order])[:-1]
    n_left = np.arange(1, n)
    n_right = n - n_left
    valid = (xs[1:] > xs[:-1]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    pos_right = pos_left[-1] + y[order][-1] - pos_left
    p_l = pos_left / n_left
    p_r = pos_right / n_right
    impurity = (n_left * 2 * p_l * (1 - p_l) + n_right * 2 * p_r * (1 - p_r)) / n
    impurity = np.where(valid, impurity, np.inf)
    i = int(np.argmin(impurity))
    thr = 0.5 * (xs[i] + xs[i + 1])
    if thr >= xs[i + 1]:
        # midpoint of adjacent floats rounds up onto the larger one
        thr = xs[i]
    return float(impurity[i]), float(thr)


class DecisionTree:
    """Array-backed binary tree; leaves store the class-1 fraction."""

    def __init__(self, max_depth=None, min_leaf=1, features_per_split=None, rng=None):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.features_per_split = features_per_split
        self.rng = rng if rng is not None else np.random.default_rng()

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        self.n_features_ = X.shape[1]
        mtry = self.features_per_split or self.n_features_
        mtry = min(mtry, self.n_features_)
        feature, threshold, left, right, value = [], [], [], [], []

        def new_node(idx):
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(float(y[idx].mean()))
            return len(value) - 1

        stack = [(new_node(np.arange(X.shape[0])), np.arange(X.shape[0]), 0)]
        while stack:
            node, idx, depth = stack.pop()
            yi = y[idx]
            n_pos = yi.sum()
            if n_pos == 0 or n_pos == len(idx) or len(idx) < 2 * self.min_leaf:
                continue
            if self.max_depth is not None and depth >= self.max_depth:
                continue
            best = None
            tried = 0
            # draw features until mtry non-constant ones have been examined
            for f in self.rng.permutation(self.n_features_):
                col = X[idx, f]
                if col.min() == col.max():
                    continue
                tried += 1
                found = best_split(col, yi, self.min_leaf)
                if found is not None and (best is None or found[0] < best[0]):
                    best = (found[0], found[1], f)
                if tried >= mtry:
                    break
            if best is None:
                continue
            _, thr, f = best
            go_left = X[idx, f] <= thr
            feature[node] = int(f)
            threshold[node] = thr
            li, ri = idx[go_left], idx[~go_left]
            left[node] = new_node(li)
            right[node] = new_node(ri)
            stack.append((right[node], ri, depth + 1))
            stack.append((left[node], li, depth + 1))

        self.feature_ = np.array(feature)
        self.threshold_ = np.array(threshold)
        self.left_ = np.array(left)
        self.right_ = np.array(right)
        self.value_ = np.array(value)
        return self

    @property
    def n_nodes(self):
        return self.value_.shape[0]

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        node = np.zeros(X.shape[0], dtype=int)
        while True:
            internal = self.feature_[node] >= 0
            if not internal.any():
                return self.value_[node]
            rows = np.flatnonzero(internal)
            n = node[rows]
            go_left = X[rows, self.feature_[n]] <= self.threshold_[n]
            node[rows] = np.where(go_left, self.left_[n], self.right_[n])


class RandomForest:
    def __init__(self, trees, n_features):
        self.trees = trees
        self.n_features = n_features

    def predict_scores(self, X) -> np.ndarray:
        """Mean over trees of the leaf class-1 fraction."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionError(f"expected {self.n_features} features, got shape {X.shape}")
        return np.mean([t.predict(X) for t in self.trees], axis=0)


def train_forest(X, y, cfg: ForestConfig = ForestConfig(), jobs: int = 1) -> RandomForest:
    """Fit a forest; each tree gets its own child seed so results ignore ``jobs``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError(f"features {X.shape} do not match {y.shape[0]} labels")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if np.unique(y).size < 2:
        raise ValueError("training set must contain both classes")
    n, d = X.shape
    mtry = cfg.features_per_split or math.ceil(math.sqrt(d))
    if mtry > d:
        raise ValueError(f"features_per_split={mtry} exceeds d={d}")
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees)

    def grow(seed):
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
        tree = DecisionTree(cfg.max_depth, cfg.min_leaf, mtry, rng)
        return tree.fit(X[idx], y[idx])

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trees = list(pool.map(grow, seeds))
    else:
        trees = [grow(s) for s in seeds]
    return RandomForest(trees, d)


def predict_scores(model: RandomForest, X) -> np.ndarray:
    return model.predict_scores(X)
