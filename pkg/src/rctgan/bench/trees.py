"""CART decision tree (Gini, grown to purity) and a bagged random forest."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_SPLIT = 2


def _best_split(x: np.ndarray, y: np.ndarray, n_classes: int, features: np.ndarray):
    """Lowest weighted Gini over ``features``; ties go to the lower feature, then the lower threshold."""
    n = len(y)
    best = (np.inf, -1, 0.0)
    onehot = np.eye(n_classes)[y]
    for f in features:
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        valid = xs[:-1] < xs[1:]
        if not valid.any():
            continue
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = left[-1] + onehot[order[-1]] - left
        nl = np.arange(1, n)[:, None].astype(np.float64)
        nr = n - nl
        gini = (nl[:, 0] - (left ** 2).sum(axis=1) / nl[:, 0]) + (nr[:, 0] - (right ** 2).sum(axis=1) / nr[:, 0])
        gini = np.where(valid, gini / n, np.inf)
        i = int(np.argmin(gini))
        if gini[i] < best[0]:
            best = (gini[i], int(f), 0.5 * (xs[i] + xs[i + 1]))
    return best


@dataclass
class DecisionTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    label: np.ndarray
    n_classes: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        node = np.zeros(len(x), dtype=np.int64)
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                break
            rows = np.flatnonzero(inner)
            go_left = x[rows, f[inner]] <= self.threshold[node[inner]]
            node[rows] = np.where(go_left, self.left[node[inner]], self.right[node[inner]])
        return self.label[node]


def _check_train(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or len(x) != len(y) or len(y) == 0:
        raise ValueError("training data must be a nonempty (n, d) matrix with n labels")
    if len(np.unique(y)) < 2:
        raise ValueError("training data has a single class")
    return x, y


def fit_dt(x, y, rng: np.random.Generator | None = None, max_features: int | None = None,
           n_classes: int | None = None) -> DecisionTree:
    """Grow a CART tree until every leaf is pure or cannot be split.

    ``max_features`` draws that many candidate features (from ``rng``) at
    each node; None considers all of them.
    """
    x, y = _check_train(x, y)
    n_classes = n_classes or int(y.max()) + 1
    d = x.shape[1]
    feature, threshold, left, right, label = [], [], [], [], []
    stack = [(np.arange(len(y)), -1, False)]
    while stack:
        idx, parent, is_right = stack.pop()
        node = len(feature)
        if parent >= 0:
            (right if is_right else left)[parent] = node
        counts = np.bincount(y[idx], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        label.append(int(np.argmax(counts)))
        if len(idx) < MIN_SPLIT or counts.max() == len(idx):
            continue
        if max_features is None or max_features >= d:
            feats = np.arange(d)
        else:
            feats = np.sort(rng.choice(d, size=max_features, replace=False))
        _, f, thr = _best_split(x[idx], y[idx], n_classes, feats)
        if f < 0:
            continue
        feature[node] = f
        threshold[node] = thr
        go_left = x[idx, f] <= thr
        # right child pushed first so the left subtree is numbered first
        stack.append((idx[~go_left], node, True))
        stack.append((idx[go_left], node, False))
    return DecisionTree(np.array(feature), np.array(threshold), np.array(left),
                        np.array(right), np.array(label), n_classes)


@dataclass
class RandomForest:
    trees: list
    n_classes: int

    def predict(self, x: np.ndarray) -> np.ndarray:
        votes = np.zeros((len(x), self.n_classes), dtype=np.int64)
        for t in self.trees:
            votes[np.arange(len(x)), t.predict(x)] += 1
        return np.argmax(votes, axis=1)  # first maximum: ties go to the lower class id


def fit_rf(x, y, rng: np.random.Generator, n_trees: int = 45, bootstrap: bool = True,
           max_features: int | str | None = "sqrt") -> RandomForest:
    x, y = _check_train(x, y)
    n_classes = int(y.max()) + 1
    d = x.shape[1]
    if max_features == "sqrt":
        max_features = max(1, int(np.sqrt(d)))
    trees = []
    for _ in range(n_trees):
        idx = rng.integers(0, len(y), size=len(y)) if bootstrap else np.arange(len(y))
        if len(np.unique(y[idx])) < 2:
            idx = np.arange(len(y))
        trees.append(fit_dt(x[idx], y[idx], rng, max_features, n_classes))
    return RandomForest(trees, n_classes)
