"""Vectorised splitmix64 streams seeded per (benchmark, seed)."""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for b in text.encode():
        h = ((h ^ b) * 0x100000001B3) & _MASK
    return h


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """splitmix64 generator; draws of size k advance the state by k steps."""

    def __init__(self, seed: int, stream: str = ""):
        self.state = (int(seed) ^ _fnv1a64(stream)) & _MASK

    def next_u64(self, count: int) -> np.ndarray:
        steps = np.arange(1, count + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * _GAMMA
            out = _mix(z)
        self.state = (self.state + count * int(_GAMMA)) & _MASK
        return out

    def uniform(self, count: int, dtype=np.float32) -> np.ndarray:
        """Reals in [0, 1); 24 random bits, so exact in float32."""
        bits = self.next_u64(count) >> np.uint64(40)
        return (bits.astype(np.float64) * 2.0 ** -24).astype(dtype)

    def integers(self, count: int, high: int) -> np.ndarray:
        """Integers in [0, high) via multiply-shift; high must be < 2**32."""
        if not 0 < high <= 1 << 32:
            raise ValueError(f"high must be in (0, 2**32], got {high}")
        hi32 = self.next_u64(count) >> np.uint64(32)
        with np.errstate(over="ignore"):
            return ((hi32 * np.uint64(high)) >> np.uint64(32)).astype(np.int64)


def stream(benchmark: str, seed: int) -> SplitMix64:
    return SplitMix64(seed, benchmark)
