"""SplitMix64-based generators usable from numba kernels.

Two flavours share one mixing function:

* ``keyed_bits(seed, a, b, c)`` -- a pure function of its key, used by the
  coupling bundle so that every variant sees the same clock for the same
  (edge, activation, slot) regardless of the order in which it asks.
* ``next_u64(state)`` -- a sequential stream over a one-element state array.
"""

import numpy as np
from numba import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S11 = np.uint64(11)
INV53 = 1.0 / 9007199254740992.0
MASK64 = (1 << 64) - 1


@njit(cache=True)
def mix64(z):
    z = (z ^ (z >> S30)) * M1
    z = (z ^ (z >> S27)) * M2
    return z ^ (z >> S31)


@njit(cache=True)
def keyed_bits(seed, a, b, c):
    h = mix64(np.uint64(seed) + GOLDEN)
    h = mix64(h ^ mix64(np.uint64(a) + GOLDEN))
    h = mix64(h ^ mix64(np.uint64(b) + GOLDEN * np.uint64(2)))
    h = mix64(h ^ mix64(np.uint64(c) + GOLDEN * np.uint64(3)))
    return h


@njit(cache=True)
def bits_to_unit(x):
    """Uniform on [0, 1) with 53 random bits."""
    return float(x >> S11) * INV53


@njit(cache=True)
def keyed_uniform(seed, a, b, c):
    return bits_to_unit(keyed_bits(seed, a, b, c))


@njit(cache=True)
def new_state(seed):
    st = np.empty(1, dtype=np.uint64)
    st[0] = mix64(np.uint64(seed) ^ np.uint64(0x5851F42D4C957F2D))
    return st


@njit(cache=True)
def next_u64(state):
    state[0] += GOLDEN
    return mix64(state[0])


@njit(cache=True)
def uniform(state):
    return bits_to_unit(next_u64(state))


@njit(cache=True)
def exponential(state, rate):
    """Exp(rate); +inf when rate == 0."""
    if rate <= 0.0:
        return np.inf
    return -np.log1p(-uniform(state)) / rate


@njit(cache=True)
def randint(state, n):
    """Uniform integer in [0, n)."""
    k = np.int64(uniform(state) * n)
    return k if k < n else n - 1


def derive_seed(root_seed: int, *path: int) -> int:
    """Deterministic 63-bit child seed for (root_seed, path...)."""
    ss = np.random.SeedSequence(entropy=int(root_seed) & MASK64, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
