"""Counter-based pseudo-random streams.

Every consumer of randomness in this project owns a stream keyed by
(seed, *keys), e.g. (seed, pixel_index, sample_index) in the renderers.
Streams with distinct keys are decorrelated, draws within a stream are
indexed by a counter, and the whole construction is a pure function of
(seed, keys, counter).  This makes renders bit-identical regardless of
tile scheduling or chunk sizes.

The generator is the splitmix64 finalizer applied to a Weyl sequence,
which is available in three equivalent forms:

* scalar numba-jitted functions for use inside render kernels,
* vectorized numpy uint64 operations for batched sampling,
* a small `RngStream` convenience class for tests and utility code.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / float(1 << 53)


@njit(cache=True, inline="always")
def mix64(z):
    """splitmix64 finalizer; bijective on uint64."""
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def stream_key(seed, k1, k2):
    """Derive a decorrelated stream key from a seed and two sub-keys."""
    h = mix64(U64(seed) + _GOLDEN)
    h = mix64(h ^ mix64(U64(k1) + _GOLDEN))
    h = mix64(h ^ mix64(U64(k2) + _GOLDEN))
    return h


@njit(cache=True, inline="always")
def rng_next_u64(state):
    """Advance the 2-word state (key, counter) and return a uint64."""
    c = state[1]
    state[1] = c + U64(1)
    return mix64(state[0] + c * _GOLDEN)


@njit(cache=True, inline="always")
def rng_uniform(state):
    """Uniform double in [0, 1) with 53 random bits."""
    return float(rng_next_u64(state) >> U64(11)) * _INV_2_53


@njit(cache=True, inline="always")
def make_state(seed, k1, k2):
    state = np.empty(2, dtype=np.uint64)
    state[0] = stream_key(seed, k1, k2)
    state[1] = U64(0)
    return state


def mix64_vec(z: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer on a uint64 array."""
    z = z.astype(np.uint64, copy=True)
    z ^= z >> U64(30)
    z *= _MIX1
    z ^= z >> U64(27)
    z *= _MIX2
    z ^= z >> U64(31)
    return z


def stream_keys_vec(seed: int, k1: np.ndarray, k2: np.ndarray | int = 0) -> np.ndarray:
    """Vectorized `stream_key` for arrays of sub-keys."""
    k1 = np.asarray(k1, dtype=np.uint64)
    k2 = np.broadcast_to(np.asarray(k2, dtype=np.uint64), k1.shape)
    h = mix64_vec(np.full(k1.shape, U64(seed) + _GOLDEN, dtype=np.uint64))
    h = mix64_vec(h ^ mix64_vec(k1 + _GOLDEN))
    h = mix64_vec(h ^ mix64_vec(k2 + _GOLDEN))
    return h


def uniforms_from_keys(keys: np.ndarray, counter: np.ndarray | int) -> np.ndarray:
    """Uniform [0,1) doubles for (key, counter) pairs, matching rng_uniform."""
    keys = np.asarray(keys, dtype=np.uint64)
    c = np.broadcast_to(np.asarray(counter, dtype=np.uint64), keys.shape)
    u = mix64_vec(keys + c * _GOLDEN)
    return (u >> U64(11)).astype(np.float64) * _INV_2_53


class RngStream:
    """Sequential view of one counter-based stream.

    Not thread safe; use one instance per logical consumer.
    """

    def __init__(self, seed: int, k1: int = 0, k2: int = 0):
        self.state = make_state(seed, k1, k2)

    def next_u64(self) -> int:
        return int(rng_next_u64(self.state))

    def uniform(self, n: int | None = None):
        if n is None:
            return rng_uniform(self.state)
        key = self.state[0]
        c0 = int(self.state[1])
        self.state[1] = U64(c0 + n)
        counters = np.arange(c0, c0 + n, dtype=np.uint64)
        return uniforms_from_keys(np.full(n, key, dtype=np.uint64), counters)

    def integers(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi); modulo bias negligible for small ranges."""
        span = hi - lo
        return lo + int(self.next_u64() % np.uint64(span))
