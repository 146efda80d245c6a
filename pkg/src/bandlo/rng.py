"""Counter-based deterministic random bits.

Every random quantity in this package is a pure function of a 64-bit key
and a counter, via a splitmix64-style mixer. Entry (i, j) of a sampled
matrix, step t of a sampled walk, etc. are therefore reproducible
independently of evaluation order, which is what makes parallel trials
merge deterministically.

All arithmetic is on uint64 with wraparound; results are platform
independent.
"""

from __future__ import annotations

import numpy as np

__all__ = ["mix64", "hash_counters", "derive_key", "uniform_below", "sign_array"]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def mix64(x: int) -> int:
    """Scalar splitmix64 finalizer on a 64-bit integer."""
    x &= _MASK
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _MASK
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _MASK
    x ^= x >> 31
    return x


def derive_key(key: int, *tags: int) -> int:
    """Fold tags into a key, one mix round per tag (stream splitting)."""
    k = key & _MASK
    for t in tags:
        k = mix64(k ^ mix64(t & _MASK))
    return k


def hash_counters(key: int, counters: np.ndarray) -> np.ndarray:
    """Vectorized mix of (key, counter) pairs into uniform uint64 words."""
    with np.errstate(over="ignore"):
        x = counters.astype(np.uint64) * _GAMMA + np.uint64(mix64(key))
        x ^= x >> np.uint64(30)
        x *= _M1
        x ^= x >> np.uint64(27)
        x *= _M2
        x ^= x >> np.uint64(31)
    return x


def sign_array(key: int, counters: np.ndarray) -> np.ndarray:
    """±1 int64 array keyed by counters (top hash bit decides the sign)."""
    bits = hash_counters(key, counters) >> np.uint64(63)
    return 1 - 2 * bits.astype(np.int64)


def uniform_below(key: int, counters: np.ndarray, bound: int) -> np.ndarray:
    """Exactly uniform integers in [0, bound) keyed by counters.

    Uses rejection on the top multiple of bound; rejected lanes are
    re-hashed under a bumped key, so the result stays a pure function of
    (key, counter).
    """
    if bound <= 0:
        raise ValueError("bound must be positive")
    if bound > _MASK:
        raise ValueError("bound exceeds 64 bits")
    spill = (_MASK + 1) % bound
    shape = counters.shape
    if spill == 0:  # bound divides 2^64: no rejection needed
        words = hash_counters(key, counters.reshape(-1))
        return (words % np.uint64(bound)).astype(np.int64).reshape(shape)
    limit = np.uint64((_MASK + 1) - spill)
    out = np.empty(counters.size, dtype=np.int64)
    pending = np.arange(counters.size)
    cnt = counters.reshape(-1)
    k = key
    round_ = 0
    while pending.size:
        words = hash_counters(k, cnt)
        ok = words < limit
        out[pending[ok]] = (words[ok] % np.uint64(bound)).astype(np.int64)
        pending = pending[~ok]
        cnt = cnt[~ok]
        round_ += 1
        k = derive_key(key, 0x7E6E, round_)
    return out.reshape(shape)
