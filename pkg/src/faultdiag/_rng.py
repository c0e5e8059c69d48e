"""Deterministic seed derivation and counter-based uniform draws.

Every stochastic stage in the toolkit derives its randomness from a master
seed through named labels, and the sampling kernels draw uniforms by hashing
(read key, counter) pairs with a splitmix64 finalizer.  Because the draws are
pure functions of their coordinates, results do not depend on evaluation
order, and the numba and numpy sampling backends see identical streams.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1

_GAMMA = 0x9E3779B97F4A7C15
_MULT1 = 0xBF58476D1CE4E5B9
_MULT2 = 0x94D049BB133111EB

# 53-bit mantissa step; uniforms are multiples of this in [0, 1).
U53 = 2.0**-53


def mix64(z: int) -> int:
    """splitmix64 finalizer over python ints (reference implementation)."""
    z = (z + _GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * _MULT1) & MASK64
    z = ((z ^ (z >> 27)) * _MULT2) & MASK64
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer; ``z`` must be uint64 (wraps mod 2^64)."""
    z = z + np.uint64(_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MULT1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MULT2)
    return z ^ (z >> np.uint64(31))


def derive_seed(master: int, label: str, index: int = 0) -> int:
    """Stable 64-bit stage seed from a master seed and a stage label."""
    digest = hashlib.sha256(f"{master}:{label}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def read_key(seed: int, read_index: int) -> int:
    """Per-read stream key; matches the kernel implementations bit for bit."""
    return mix64((mix64(seed & MASK64) + read_index) & MASK64)


def uniform(key: int, counter: int) -> float:
    """Uniform in [0, 1) at integer coordinate ``counter`` of stream ``key``."""
    return float(mix64((key + counter) & MASK64) >> 11) * U53


def uniform_array(key: int, counters: np.ndarray) -> np.ndarray:
    """Vectorized :func:`uniform` over a uint64 array of counters."""
    z = mix64_array(np.uint64(key) + counters.astype(np.uint64))
    return (z >> np.uint64(11)).astype(np.float64) * U53
