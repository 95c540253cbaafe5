"""Seeded random-stream construction.

Every stochastic component in the package draws from a numpy PCG64
generator whose seed is derived here. PCG64 is a named, documented
generator with identical output on every platform numpy supports, which
is what makes the bit-reproducibility contract possible. Per-chain
substreams are formed as ``seed XOR splitmix64(chain_index)`` so that a
chain's draws depend only on (seed, chain index), never on how many
other chains run or in what order.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def splitmix64(value: int) -> int:
    """One SplitMix64 finalizer step: maps any 64-bit int to a well-mixed one."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def substream_seed(seed: int, index: int) -> int:
    """Derive the 64-bit seed of substream ``index`` from a master seed."""
    return (seed ^ splitmix64(index)) & _MASK64


def chain_rng(seed: int, chain_index: int) -> np.random.Generator:
    """PCG64 generator for one chain of a sampling run."""
    return np.random.Generator(np.random.PCG64(substream_seed(seed, chain_index)))


def tagged_rng(seed: int, tag: str) -> np.random.Generator:
    """PCG64 generator for a named auxiliary purpose (e.g. predictive noise).

    The tag is folded byte-by-byte through splitmix64 so distinct purposes
    sharing one master seed get unrelated streams.
    """
    h = 0
    for b in tag.encode("utf-8"):
        h = splitmix64(h ^ b)
    return np.random.Generator(np.random.PCG64((seed ^ h) & _MASK64))
