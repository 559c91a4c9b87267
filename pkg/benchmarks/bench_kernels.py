"""Time the compiled and pure-numpy kernels side by side.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both backends are imported directly, so the CROPPAT_NO_NUMBA flag does not
matter here.  Outputs are checked for equality before timings are printed.
"""

import argparse
import timeit

import numpy as np

from croppat import _kernels
from croppat.dataset import SplitSpec, SyntheticSpec, fit_normalizer, generate_synthetic, stratified_split
from croppat.forest import ForestParams, rf_fit


def reference_data():
    d = generate_synthetic(SyntheticSpec(8, 136, 50, 0.02, seed=7))
    train, test = stratified_split(d, SplitSpec(0.70, seed=7))
    norm = fit_normalizer(train)
    return norm.apply(train), norm.apply(test)


def best(stmt, repeat):
    return min(timeit.repeat(stmt, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--ntree", type=int, default=100)
    args = ap.parse_args()
    train, test = reference_data()
    X, y, K = train.features, train.labels, train.n_classes
    idx = np.arange(len(train), dtype=np.int64)
    feats = np.arange(X.shape[1], dtype=np.int64)
    params = ForestParams(ntree=args.ntree, mtry=8, seed=1)

    # warm-up compiles (or loads cached) machine code
    split_out = [_kernels.best_split_numba(X, y, idx, feats, K),
                 _kernels.best_split_numpy(X, y, idx, feats, K)]
    assert split_out[0] == split_out[1], split_out
    fits = [rf_fit(train, params, split=_kernels.best_split_numba),
            rf_fit(train, params, split=_kernels.best_split_numpy)]
    assert fits[0].trees == fits[1].trees
    packed = fits[0]._packed
    votes = [_kernels.forest_votes_numba(test.features, *packed, K),
             _kernels.forest_votes_numpy(test.features, *packed, K)]
    assert np.array_equal(votes[0], votes[1])

    rows = []
    cases = {
        "best_split, root node, 136 features": (
            lambda: _kernels.best_split_numba(X, y, idx, feats, K),
            lambda: _kernels.best_split_numpy(X, y, idx, feats, K)),
        f"forest_votes, {args.ntree} trees x {len(test)} rows": (
            lambda: _kernels.forest_votes_numba(test.features, *packed, K),
            lambda: _kernels.forest_votes_numpy(test.features, *packed, K)),
        f"rf_fit, {args.ntree} trees, mtry 8": (
            lambda: rf_fit(train, params, split=_kernels.best_split_numba),
            lambda: rf_fit(train, params, split=_kernels.best_split_numpy)),
    }
    for name, (jit, ref) in cases.items():
        a, b = best(jit, args.repeat), best(ref, args.repeat)
        rows.append((name, a, b))
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel'.ljust(width)}  {'numba ms':>10}  {'numpy ms':>10}  {'speedup':>8}")
    for name, a, b in rows:
        print(f"{name.ljust(width)}  {1e3 * a:10.3f}  {1e3 * b:10.3f}  {b / a:7.1f}x")
    print("outputs identical across backends")


if __name__ == "__main__":
    main()
