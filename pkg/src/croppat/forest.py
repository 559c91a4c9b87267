"""Random forest of Gini CART trees with bootstrap bags and out-of-bag error.

Tree ``t`` draws everything (its bootstrap bag, then the ``mtry`` feature
subsets of its nodes in preorder) from its own stream
``make_rng(seed, t)``, so trees can be grown in any order or concurrently
and the forest is still identical.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from . import _kernels
from .dataset import DataError, Dataset
from .rng import make_rng


@dataclass(frozen=True)
class ForestParams:
    ntree: int = 300
    mtry: int = 8
    max_depth: Optional[int] = None
    min_node_size: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.ntree < 1:
            raise ValueError("ntree must be positive")
        if self.mtry < 1:
            raise ValueError("mtry must be positive")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive or None")
        if self.min_node_size < 1:
            raise ValueError("min_node_size must be positive")


@dataclass(frozen=True, eq=False)
class Tree:
    """Preorder node arena.

    Split nodes have ``feature >= 0`` and route ``x[feature] <= threshold``
    to ``left``; leaves have ``feature == -1`` and carry ``value``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    @property
    def is_leaf(self):
        return self.n_nodes == 1

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return all(np.array_equal(getattr(self, a), getattr(other, a))
                   for a in ("feature", "threshold", "left", "right", "value"))

    def predict(self, X):
        X = np.asarray(X, dtype=np.float64)
        votes = _kernels.forest_votes(X, self.feature, self.threshold, self.left, self.right,
                                      self.value, np.zeros(1, dtype=np.int64),
                                      int(self.value.max()) + 1)
        return np.argmax(votes, axis=1)

    def to_list(self):
        nodes = []
        for i in range(self.n_nodes):
            if self.feature[i] < 0:
                nodes.append({"leaf": int(self.value[i])})
            else:
                nodes.append({"feature": int(self.feature[i]),
                              "threshold": float(self.threshold[i]),
                              "left": int(self.left[i]),
                              "right": int(self.right[i])})
        return nodes

    @classmethod
    def from_list(cls, nodes):
        n = len(nodes)
        feature = np.full(n, -1, dtype=np.int64)
        threshold = np.zeros(n)
        left = np.full(n, -1, dtype=np.int64)
        right = np.full(n, -1, dtype=np.int64)
        value = np.full(n, -1, dtype=np.int64)
        for i, node in enumerate(nodes):
            if "leaf" in node:
                value[i] = node["leaf"]
            else:
                feature[i] = node["feature"]
                threshold[i] = node["threshold"]
                left[i] = node["left"]
                right[i] = node["right"]
        return cls(feature, threshold, left, right, value)


def _majority(counts):
    return int(np.argmax(counts))


def _improves(parent, cl, cr):
    """Exact test that splitting ``parent`` into ``cl``/``cr`` lowers Gini.

    Compares ``sum(cl^2)/nl + sum(cr^2)/nr > sum(parent^2)/n`` after clearing
    denominators, in Python integers.
    """
    n, nl, nr = int(parent.sum()), int(cl.sum()), int(cr.sum())
    if nl == 0 or nr == 0:
        return False
    s = sum(int(c) * int(c) for c in parent)
    sl = sum(int(c) * int(c) for c in cl)
    sr = sum(int(c) * int(c) for c in cr)
    return n * (sl * nr + sr * nl) > s * nl * nr


def grow_tree(X, y, bag, n_classes, mtry, rng, max_depth=None, min_node_size=1, split=None):
    """Grow one unpruned Gini tree on rows ``bag`` of ``X`` (a multiset)."""
    split = split or _kernels.best_split
    n_features = X.shape[1]
    feature, threshold, left, right, value = [], [], [], [], []
    # (rows, depth, parent id, is_left_child); right pushed first -> preorder
    stack = [(np.asarray(bag, dtype=np.int64), 0, -1, False)]
    while stack:
        idx, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(-1)

        counts = np.bincount(y[idx], minlength=n_classes)
        stop = (
            np.count_nonzero(counts) <= 1
            or idx.size <= min_node_size
            or (max_depth is not None and depth >= max_depth)
        )
        if not stop:
            feats = np.sort(rng.choice(n_features, size=mtry, replace=False)).astype(np.int64)
            f, t, _ = split(X, y, idx, feats, n_classes)
            if f >= 0:
                go_left = X[idx, f] <= t
                li, ri = idx[go_left], idx[~go_left]
                cl = np.bincount(y[li], minlength=n_classes)
                if _improves(counts, cl, counts - cl):
                    feature[node] = int(f)
                    threshold[node] = float(t)
                    stack.append((ri, depth + 1, node, False))
                    stack.append((li, depth + 1, node, True))
                    continue
        value[node] = _majority(counts)

    return Tree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=np.float64),
                np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                np.array(value, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple
    bags: tuple
    class_names: tuple
    n_features: int
    oob_error: float = field(default=float("nan"))

    @property
    def ntree(self):
        return len(self.trees)

    @property
    def n_classes(self):
        return len(self.class_names)

    @cached_property
    def _packed(self):
        offsets = np.cumsum([0] + [t.n_nodes for t in self.trees[:-1]]).astype(np.int64)

        def shift(a, off):
            return np.where(a >= 0, a + off, a)

        feature = np.concatenate([t.feature for t in self.trees])
        threshold = np.concatenate([t.threshold for t in self.trees])
        left = np.concatenate([shift(t.left, o) for t, o in zip(self.trees, offsets)])
        right = np.concatenate([shift(t.right, o) for t, o in zip(self.trees, offsets)])
        value = np.concatenate([t.value for t in self.trees])
        return feature, threshold, left, right, value, offsets

    def votes(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got shape {X.shape}")
        return _kernels.forest_votes(X, *self._packed, self.n_classes)

    def predict(self, X):
        return np.argmax(self.votes(X), axis=1)

    def in_bag_counts(self, n_samples):
        return np.stack([np.bincount(b, minlength=n_samples) for b in self.bags])

    def oob_fractions(self, n_samples):
        """Fraction of the training set left out of each tree's bag."""
        return (self.in_bag_counts(n_samples) == 0).mean(axis=1)

    def to_dict(self):
        return {
            "class_names": list(self.class_names),
            "n_features": self.n_features,
            "oob_error": None if np.isnan(self.oob_error) else self.oob_error,
            "trees": [t.to_list() for t in self.trees],
            "bags": [b.tolist() for b in self.bags],
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            tuple(Tree.from_list(t) for t in doc["trees"]),
            tuple(np.asarray(b, dtype=np.int64) for b in doc["bags"]),
            tuple(doc["class_names"]),
            int(doc["n_features"]),
            float(doc["oob_error"]) if doc["oob_error"] is not None else float("nan"),
        )


def _fit_one(X, y, n_classes, p: ForestParams, t, split):
    rng = make_rng(p.seed, t)
    n = X.shape[0]
    bag = rng.integers(0, n, size=n)
    tree = grow_tree(X, y, bag, n_classes, p.mtry, rng, p.max_depth, p.min_node_size, split)
    return tree, bag


def rf_fit(train: Dataset, p: ForestParams = ForestParams(), jobs: int = 1, split=None) -> ForestModel:
    if len(train) == 0:
        raise DataError("cannot fit a forest on an empty training set")
    if p.mtry > train.feature_count:
        raise ValueError(f"mtry={p.mtry} exceeds the {train.feature_count} available features")
    X, y, K = train.features, train.labels, train.n_classes

    def work(t):
        return _fit_one(X, y, K, p, t, split)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            grown = list(pool.map(work, range(p.ntree)))
    else:
        grown = [work(t) for t in range(p.ntree)]

    model = ForestModel(tuple(g[0] for g in grown), tuple(g[1] for g in grown),
                        train.class_names, train.feature_count)
    return ForestModel(model.trees, model.bags, model.class_names, model.n_features,
                       rf_oob_error(model, train))


def rf_predict(m: ForestModel, x) -> int:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("rf_predict takes one feature vector")
    return int(m.predict(x)[0])


def rf_oob_error(m: ForestModel, train: Dataset) -> float:
    """Misclassification rate of out-of-bag majority votes.

    Samples that landed in every tree's bag have no out-of-bag vote and are
    left out of the denominator.  Returns NaN if no sample has one.
    """
    n = len(train)
    votes = np.zeros((n, m.n_classes), dtype=np.int64)
    for tree, bag in zip(m.trees, m.bags):
        oob = np.bincount(bag, minlength=n) == 0
        if not oob.any():
            continue
        pred = tree.predict(train.features[oob])
        np.add.at(votes, (np.flatnonzero(oob), pred), 1)
    has_vote = votes.sum(axis=1) > 0
    if not has_vote.any():
        return float("nan")
    pred = np.argmax(votes[has_vote], axis=1)
    return float(np.mean(pred != train.labels[has_vote]))
