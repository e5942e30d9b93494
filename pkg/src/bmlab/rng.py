"""Deterministic random-stream management.

Every stochastic routine in this package draws from a Philox counter-based
generator keyed through ``numpy.random.SeedSequence``.  Streams are split by
integer ids, never by sharing generator state, so any two distinct id tuples
yield statistically independent and reproducible streams:

    stream(seed)                  main stream for a path sample
    stream(seed, REFINE, k)       k-th bridge-refinement round of that path
    stream(seed, BLOCK, b)        b-th Monte Carlo sample block

Parallel workers each own disjoint block ids, so results never depend on the
worker count or scheduling order.
"""

from __future__ import annotations

import numpy as np

# Stream domain ids.  Keep stable: changing them changes every sampled path.
PATH = 0
REFINE = 1
BLOCK = 2
SHUFFLE = 3

# Fixed number of samples per Monte Carlo block; aggregation over blocks is
# associative, which makes estimates independent of how blocks are scheduled.
BLOCK_SIZE = 1 << 14


def stream(seed: int, *ids: int) -> np.random.Generator:
    """Return the generator for stream ``ids`` derived from ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(ids))
    return np.random.Generator(np.random.Philox(ss))


def block_count(n: int) -> int:
    return (int(n) + BLOCK_SIZE - 1) // BLOCK_SIZE


def block_sizes(n: int) -> list[int]:
    """Sizes of the sample blocks covering ``n`` total samples."""
    full, rem = divmod(int(n), BLOCK_SIZE)
    out = [BLOCK_SIZE] * full
    if rem:
        out.append(rem)
    return out
