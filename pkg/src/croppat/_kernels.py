"""Inner loops of tree growth and forest voting.

Each kernel exists twice: a loop version compiled by numba and a vectorised
numpy version.  They perform the same IEEE operations in the same order on
every candidate, so they return bit-identical results; the test-suite and
``benchmarks/bench_kernels.py`` hold them to that.

Split score
    For a candidate partition with left/right class counts ``cl``/``cr``,
    the weighted Gini impurity is ``(n - sum(cl**2)/nl - sum(cr**2)/nr) / n``.
    Minimising it is the same as maximising
    ``score = sum(cl**2)/nl + sum(cr**2)/nr``, which is what the kernels
    compute (integer sums, then two float divisions and one addition).
"""

import numpy as np

from ._accel import USE_NUMBA, njit


def _midpoint(a, b):
    t = (a + b) / 2.0
    # adjacent floats can round the midpoint up onto b
    if t >= b:
        t = a
    return t


_midpoint_jit = njit(_midpoint)


@njit
def best_split_numba(X, y, idx, features, n_classes):
    n = idx.shape[0]
    best_score = -np.inf
    best_feature = -1
    best_threshold = 0.0
    vals = np.empty(n)
    labs = np.empty(n, dtype=np.int64)
    total = np.zeros(n_classes, dtype=np.int64)
    for i in range(n):
        total[y[idx[i]]] += 1
    for f in features:
        for i in range(n):
            vals[i] = X[idx[i], f]
        order = np.argsort(vals, kind="mergesort")
        for i in range(n):
            labs[i] = y[idx[order[i]]]
        left = np.zeros(n_classes, dtype=np.int64)
        right = total.copy()
        sl = 0
        sr = 0
        for k in range(n_classes):
            sr += right[k] * right[k]
        for i in range(n - 1):
            c = labs[i]
            sl += 2 * left[c] + 1
            sr -= 2 * right[c] - 1
            left[c] += 1
            right[c] -= 1
            lo = vals[order[i]]
            hi = vals[order[i + 1]]
            if lo < hi:
                score = sl / (i + 1) + sr / (n - i - 1)
                if score > best_score:
                    best_score = score
                    best_feature = f
                    best_threshold = _midpoint_jit(lo, hi)
    return best_feature, best_threshold, best_score


def best_split_numpy(X, y, idx, features, n_classes):
    """Best ``(feature, threshold, score)`` over ``features`` for rows ``idx``.

    ``features`` must be ascending; ties keep the lowest feature, then the
    lowest threshold.  Returns feature ``-1`` when no feature has two
    distinct values.
    """
    n = idx.shape[0]
    yi = y[idx]
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), yi] = 1
    total = onehot.sum(axis=0)
    nl = np.arange(1, n)
    nr = n - nl
    best_score, best_feature, best_threshold = -np.inf, -1, 0.0
    for f in features:
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        left = np.cumsum(onehot[order], axis=0)[:-1]
        right = total - left
        sl = (left * left).sum(axis=1)
        sr = (right * right).sum(axis=1)
        score = sl / nl + sr / nr
        score[vs[:-1] >= vs[1:]] = -np.inf
        if score.size == 0:
            continue
        j = int(np.argmax(score))
        if score[j] > best_score:
            best_score = float(score[j])
            best_feature = int(f)
            best_threshold = _midpoint(vs[j], vs[j + 1])
    return best_feature, best_threshold, best_score


@njit
def forest_votes_numba(X, feature, threshold, left, right, value, roots, n_classes):
    n = X.shape[0]
    votes = np.zeros((n, n_classes), dtype=np.int64)
    for i in range(n):
        for t in range(roots.shape[0]):
            node = roots[t]
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            votes[i, value[node]] += 1
    return votes


def forest_votes_numpy(X, feature, threshold, left, right, value, roots, n_classes):
    """Per-class vote counts ``(n, K)`` from a packed forest.

    The packed arrays hold every tree's nodes back to back; ``roots[t]`` is
    the offset of tree ``t`` and child indices are absolute.
    """
    n = X.shape[0]
    votes = np.zeros((n, n_classes), dtype=np.int64)
    rows = np.arange(n)
    for root in roots:
        node = np.full(n, root, dtype=np.int64)
        active = feature[node] >= 0
        while active.any():
            a = node[active]
            go_left = X[rows[active], feature[a]] <= threshold[a]
            node[active] = np.where(go_left, left[a], right[a])
            active = feature[node] >= 0
        np.add.at(votes, (rows, value[node]), 1)
    return votes


if USE_NUMBA:
    best_split = best_split_numba
    forest_votes = forest_votes_numba
else:
    best_split = best_split_numpy
    forest_votes = forest_votes_numpy
