"""Decision trees with value thresholds and order-based routing.

Split thresholds are actual training feature values and routing uses
``x <= threshold``, so predictions are invariant under any strictly
increasing per-feature transform applied consistently to train and test
data.  The same node machinery backs the Gini classification tree and the
squared-error regression tree used by gradient boosting.
"""

from __future__ import annotations

import math

import numpy as np


class _Node:
    __slots__ = ("feature", "threshold", "left", "right", "value", "score")

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.value = 0          # leaf label (classification) or leaf value (regression)
        self.score = 0.0        # leaf class-1 fraction (classification only)

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _route(node: _Node, X: np.ndarray, idx: np.ndarray, out: np.ndarray, attr: str):
    if node.is_leaf:
        out[idx] = getattr(node, attr)
        return
    mask = X[idx, node.feature] <= node.threshold
    _route(node.left, X, idx[mask], out, attr)
    _route(node.right, X, idx[~mask], out, attr)


def _best_gini_split(X, y, idx, features, min_leaf):
    """Best (impurity, feature, threshold) over candidate features, or None.

    Candidate positions are boundaries between distinct sorted values; the
    weighted Gini depends only on the label partition, so ties resolve
    identically under any order-preserving transform.
    """
    n = idx.size
    best = None
    for f in features:
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        if xs[0] == xs[-1]:
            continue
        ys = y[idx][order]
        left_ones = np.cumsum(ys)[:-1].astype(float)
        k = np.arange(1, n, dtype=float)
        right_ones = float(ys.sum()) - left_ones
        rk = n - k
        valid = (xs[1:] != xs[:-1]) & (k >= min_leaf) & (rk >= min_leaf)
        if not valid.any():
            continue
        gini_l = 1.0 - (left_ones / k) ** 2 - ((k - left_ones) / k) ** 2
        gini_r = 1.0 - (right_ones / rk) ** 2 - ((rk - right_ones) / rk) ** 2
        weighted = (k * gini_l + rk * gini_r) / n
        weighted = np.where(valid, weighted, np.inf)
        p = int(np.argmin(weighted))
        if best is None or weighted[p] < best[0] - 1e-12:
            best = (float(weighted[p]), int(f), float(xs[p]))
    return best


class DecisionTreeClassifier:
    """Binary CART with Gini impurity.

    max_features, when set, draws that many candidate features per split
    from ``rng`` (random-forest usage).
    """

    def __init__(self, max_depth: int = 6, min_leaf: int = 5,
                 max_features: int | None = None, rng: np.random.Generator | None = None):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.rng = rng
        self.root: _Node | None = None
        self.n_features = 0

    def fit(self, X: np.ndarray, y: np.ndarray) -> "DecisionTreeClassifier":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=int)
        self.n_features = X.shape[1]
        self.root = self._grow(X, y, np.arange(len(y)), depth=0)
        return self

    def _candidate_features(self) -> np.ndarray:
        if self.max_features is None or self.max_features >= self.n_features:
            return np.arange(self.n_features)
        return np.sort(self.rng.choice(self.n_features, self.max_features, replace=False))

    def _grow(self, X, y, idx, depth) -> _Node:
        node = _Node()
        ones = int(y[idx].sum())
        n = idx.size
        node.score = ones / n
        node.value = 1 if 2 * ones > n else 0
        if depth >= self.max_depth or n < 2 * self.min_leaf or ones == 0 or ones == n:
            return node
        best = _best_gini_split(X, y, idx, self._candidate_features(), self.min_leaf)
        if best is None:
            return node
        _, node.feature, node.threshold = best
        mask = X[idx, node.feature] <= node.threshold
        node.left = self._grow(X, y, idx[mask], depth + 1)
        node.right = self._grow(X, y, idx[~mask], depth + 1)
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.zeros(len(X), dtype=int)
        _route(self.root, X, np.arange(len(X)), out, "value")
        return out

    def predict_score(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.zeros(len(X), dtype=float)
        _route(self.root, X, np.arange(len(X)), out, "score")
        return out


def _best_mse_split(X, g, idx, min_leaf):
    """Best squared-error split: maximize L^2/k + R^2/(n-k) of target sums."""
    n = idx.size
    best = None
    total = float(g[idx].sum())
    for f in range(X.shape[1]):
        xs = X[idx, f]
        order = np.argsort(xs, kind="stable")
        xs = xs[order]
        if xs[0] == xs[-1]:
            continue
        gs = g[idx][order]
        left = np.cumsum(gs)[:-1]
        k = np.arange(1, n, dtype=float)
        rk = n - k
        valid = (xs[1:] != xs[:-1]) & (k >= min_leaf) & (rk >= min_leaf)
        if not valid.any():
            continue
        gain = left**2 / k + (total - left) ** 2 / rk
        gain = np.where(valid, gain, -np.inf)
        p = int(np.argmax(gain))
        if best is None or gain[p] > best[0] + 1e-12:
            best = (float(gain[p]), int(f), float(xs[p]))
    return best


class RegressionTree:
    """Squared-error tree over pseudo-residuals with Newton leaf values.

    Leaf value = sum(residuals) / (sum(hessians) + eps), the single Newton
    step for logistic loss used by gradient boosting.
    """

    def __init__(self, max_depth: int = 3, min_leaf: int = 1):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.root: _Node | None = None

    def fit(self, X: np.ndarray, residuals: np.ndarray, hessians: np.ndarray) -> "RegressionTree":
        X = np.asarray(X, dtype=float)
        self.root = self._grow(X, residuals, hessians, np.arange(len(residuals)), depth=0)
        return self

    def _grow(self, X, g, h, idx, depth) -> _Node:
        node = _Node()
        node.value = float(g[idx].sum() / (h[idx].sum() + 1e-12))
        if depth >= self.max_depth or idx.size < 2 * self.min_leaf:
            return node
        best = _best_mse_split(X, g, idx, self.min_leaf)
        if best is None:
            return node
        _, node.feature, node.threshold = best
        mask = X[idx, node.feature] <= node.threshold
        node.left = self._grow(X, g, h, idx[mask], depth + 1)
        node.right = self._grow(X, g, h, idx[~mask], depth + 1)
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.zeros(len(X), dtype=float)
        _route(self.root, X, np.arange(len(X)), out, "value")
        return out
