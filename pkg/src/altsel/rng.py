"""Deterministic stream splitting for Monte Carlo runs.

Every consumer of randomness owns a domain tag, and each replication inside
a domain gets its own counter-based Philox stream keyed by
(master seed, domain, replication index).  Replications therefore draw
identical uniforms no matter how work is batched or spread across threads,
which is what makes every estimate in this package bit-reproducible.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_MASK48 = (1 << 48) - 1

# domain tags (one per independent consumer of randomness)
POLICY = 1
MEANCHECK = 2
REPLICATION = 3
REGENERATION = 4
SERIES = 5
CLT = 6
CLOSENESS = 7
CHAIN = 8
STATIONARY = 9


def philox_key(seed: int, domain: int, index: int) -> np.ndarray:
    """128-bit Philox key packing (seed, domain, index)."""
    if index < 0 or index > _MASK48:
        raise ValueError(f"stream index {index} outside 48-bit range")
    word = ((domain & 0xFFFF) << 48) | (index & _MASK48)
    return np.array([seed & _MASK64, word], dtype=np.uint64)


def stream(seed: int, domain: int, index: int = 0) -> np.random.Generator:
    """Generator for one (seed, domain, index) substream."""
    return np.random.Generator(np.random.Philox(key=philox_key(seed, domain, index)))


def uniform_rows(seed: int, domain: int, lo: int, hi: int, n: int) -> np.ndarray:
    """Matrix of uniforms; row r holds stream (seed, domain, lo + r).

    Row contents depend only on the absolute replication index, never on the
    batch boundaries, so any batching of [0, reps) yields the same numbers.
    """
    out = np.empty((hi - lo, n))
    for r in range(hi - lo):
        out[r] = stream(seed, domain, lo + r).random(n)
    return out
