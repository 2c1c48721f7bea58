"""SplitMix64 pseudo-random generator.

Chosen for bit-exact reproducibility: the whole state is one 64-bit
integer and the update is three xorshift-multiply lines, so any
implementation on any platform produces the same stream for the same
seed. All randomness in this package flows through this generator.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Deterministic 64-bit generator; state advances by a fixed odd gamma."""

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform_block(self, n: int) -> np.ndarray:
        """n uniform floats in [0, 1), identical to n next_float() calls.

        The k-th output only depends on state + k*gamma, so the block is
        computed with vectorized uint64 arithmetic and the state is then
        advanced past it.
        """
        if n < 0:
            raise ValueError(f"block length must be >= 0, got {n}")
        idx = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(self._state) + idx * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
        self._state = (self._state + n * _GAMMA) & _MASK64
        return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def symmetric_block(self, n: int) -> np.ndarray:
        """n uniform floats in [-1, 1)."""
        return 2.0 * self.uniform_block(n) - 1.0
