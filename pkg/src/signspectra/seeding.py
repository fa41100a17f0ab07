"""Deterministic derivation of per-replicate random streams.

Replicate i of a run with master seed s draws from a NumPy PCG64 generator
seeded with ``derive_seed(s, i)``, a 64-bit SplitMix64 avalanche mix of the
pair. The mix is counter-based (no sequential state), so any replicate's
stream can be reconstructed independently of all others; ports in other
languages can reproduce the seed derivation exactly even if their downstream
variates differ.

``derive_seed(s, i)`` equals the (i+1)-th output of the reference SplitMix64
generator seeded with s, e.g. ``derive_seed(0, 0) == 0xE220A8397B1DCDAF``.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64_mix(value: int) -> int:
    """SplitMix64 output function (Steele, Lea, Flood 2014)."""
    z = value & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master_seed: int, replicate_index: int) -> int:
    """64-bit seed for one replicate: mix(master + (index+1) * golden gamma)."""
    if replicate_index < 0:
        raise ValueError("replicate_index must be >= 0")
    return splitmix64_mix((master_seed + (replicate_index + 1) * _GOLDEN) & _MASK64)


def derive_stream(master_seed: int, replicate_index: int) -> np.random.Generator:
    """Independent, reproducible generator for (master seed, replicate index)."""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, replicate_index)))
