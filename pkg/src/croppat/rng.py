"""Seeded random streams.

Every random draw in the package comes from ``numpy.random.Generator``
backed by the PCG64 bit generator (O'Neill, 2014), seeded through numpy's
``SeedSequence``.  Independent sub-streams (one per tree, per resampling
run, ...) are keyed off a master seed with the SplitMix64 finaliser, so a
stream depends only on ``(seed, keys)`` and never on execution order.
"""

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x):
    """One SplitMix64 step: advance ``x`` by the golden gamma and mix."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed, *keys):
    """Mix a 64-bit seed with integer keys into a new 64-bit seed.

    >>> derive_seed(7, 0) == derive_seed(7, 0)
    True
    >>> derive_seed(7, 0) != derive_seed(7, 1)
    True
    """
    h = splitmix64(int(seed) & MASK64)
    for k in keys:
        h = splitmix64(h ^ (int(k) & MASK64))
    return h


def make_rng(seed, *keys):
    if keys:
        seed = derive_seed(seed, *keys)
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))
