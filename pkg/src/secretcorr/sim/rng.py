"""Counter-based random numbers keyed by (seed, stream, block, counter).

Every draw is ``mix(mix(stream_key + block * GOLDEN) + counter)`` with the
splitmix64 finalizer ``mix``, so any block can be regenerated on its own
and blocks may be processed in any order.  Categorical sampling uses a
Walker alias table: the high 32 bits of a hash pick a column, the low 32
bits decide between the column and its alias.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

SOURCE_STREAM = 0
PARTY_STREAM_BASE = 1  # party i uses stream PARTY_STREAM_BASE + i - 1
FORMATION_STREAM = 1000


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream: int) -> int:
    return mix64(mix64(seed & MASK64) ^ mix64((stream + 1) * GOLDEN))


def block_base(key: int, block: int) -> int:
    return mix64(key + block * GOLDEN)


def draw(key: int, block: int, counter: int) -> int:
    return mix64(block_base(key, block) + counter)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized :func:`mix64` on uint64 arrays (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def draws_array(key: int, blocks: np.ndarray, counter: int) -> np.ndarray:
    blocks = np.asarray(blocks, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = mix64_array(np.uint64(key) + blocks * np.uint64(GOLDEN))
        return mix64_array(base + np.uint64(counter))


def build_alias(weights: Sequence[Fraction]) -> Tuple[np.ndarray, np.ndarray]:
    """Alias table ``(threshold, alias)`` with 32-bit integer thresholds.

    Column ``i`` keeps itself when the low 32 bits of the hash fall below
    ``threshold[i]``.  Built in exact rationals so the only error is the
    2**-32 quantization of each threshold.
    """
    w = [Fraction(x) for x in weights]
    total = sum(w)
    if total <= 0 or any(x < 0 for x in w):
        raise ValueError("alias weights must be non-negative with positive sum")
    k = len(w)
    scaled = [x * k / total for x in w]
    thr = [Fraction(1)] * k
    alias = list(range(k))
    small = [i for i in range(k) if scaled[i] < 1]
    large = [i for i in range(k) if scaled[i] >= 1]
    while small and large:
        s, l = small.pop(), large.pop()
        thr[s], alias[s] = scaled[s], l
        scaled[l] -= 1 - scaled[s]
        (small if scaled[l] < 1 else large).append(l)
    threshold = np.array([min(round(t * 2 ** 32), 2 ** 32) for t in thr], dtype=np.uint64)
    return threshold, np.array(alias, dtype=np.int64)


def alias_lookup(h: np.ndarray, threshold: np.ndarray, alias: np.ndarray) -> np.ndarray:
    """Vectorized alias sampling from 64-bit hashes."""
    h = np.asarray(h, dtype=np.uint64)
    k = np.uint64(len(threshold))
    col = ((h >> np.uint64(32)) * k) >> np.uint64(32)
    stay = (h & np.uint64(0xFFFFFFFF)) < threshold[col]
    col = col.astype(np.int64)
    return np.where(stay, col, alias[col])


def bit_of(h: np.ndarray) -> np.ndarray:
    """A fair bit from each hash (its top bit)."""
    return (np.asarray(h, dtype=np.uint64) >> np.uint64(63)).astype(np.int64)
