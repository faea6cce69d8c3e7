"""Seeding and random-number plumbing shared by every stochastic component.

All randomness in this package flows through numpy's Philox bit generator,
a 64-bit counter-based PRNG whose output stream is fixed by numpy's bit
generator compatibility policy. Gaussian variates come from
``Generator.standard_normal`` (ziggurat method). Derived seeds (per
episode, per candidate, per sweep cell) are produced with the SplitMix64
finalizer below so that nearby base seeds yield unrelated streams.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix_seed(base: int, k: int) -> int:
    """Derive the k-th child seed from a base seed (SplitMix64 finalizer)."""
    z = (int(base) + _GOLDEN * (int(k) + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def rng_from(seed: int) -> np.random.Generator:
    """Build the package-wide Generator (Philox keyed by a 64-bit seed)."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))
