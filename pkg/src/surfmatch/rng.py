"""Counter-based random streams for Monte Carlo trials.

Each trial derives its own 64-bit state from ``(master seed, trial index)``
through the splitmix64 finalizer, so the stream a trial sees never depends on
which worker ran it or in which order. A stream is a one-element ``uint64``
array that the draw functions advance in place.
"""

from __future__ import annotations

import numpy as np

from ._jit import njit

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0

# stream salts
NOISE_SALT = np.uint64(0x6E6F697365000001)
JITTER_SALT = np.uint64(0x6A69747465720002)


@njit
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit
def trial_state(master, index, salt):
    """Initial state of the stream for one trial."""
    return mix64(mix64(master ^ salt) + np.uint64(index) * GOLDEN)


@njit
def next_u64(state):
    state[0] = state[0] + GOLDEN
    return mix64(state[0])


@njit
def next_uniform(state):
    """Uniform double in [0, 1)."""
    return np.float64(next_u64(state) >> _S11) * _INV53


@njit
def hashed_uniform(key, counter):
    """Stateless uniform in [0, 1) addressed by (key, counter)."""
    return np.float64(mix64(key + np.uint64(counter) * GOLDEN) >> _S11) * _INV53


def as_seed(seed: int) -> np.uint64:
    """Reduce an arbitrary non-negative Python int to a uint64 seed."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
