"""Seeded randomness.

Every random choice in the package draws from :class:`Rng`, a thin layer over
NumPy's PCG64 bit generator.  Only ``random_raw`` is used: NumPy guarantees
that raw stream for a given seed, while ``Generator`` convenience methods may
change between releases.

Seeding: ``SeedSequence(entropy=seed, spawn_key=key)``.  The master stream has
an empty key; stream ``i`` derived from the same seed uses key ``(i,)``.
"""

from __future__ import annotations

import numpy as np

SEED_MAX = (1 << 64) - 1


class Rng:
    def __init__(self, seed: int = 0, key: tuple[int, ...] = ()):
        if not 0 <= int(seed) <= SEED_MAX:
            raise ValueError(f"seed {seed} is not a 64-bit unsigned integer")
        self.seed = int(seed)
        self.key = tuple(key)
        self._bg = np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self.key))

    def child(self, index: int) -> "Rng":
        """Independent stream for parallel worker/receiver ``index``."""
        return Rng(self.seed, self.key + (int(index),))

    def u64(self) -> int:
        return int(self._bg.random_raw())

    def element(self, q: int) -> int:
        """Uniform element of GF(q); q is a power of two so masking is exact."""
        return self.u64() & (q - 1)

    def nonzero_element(self, q: int) -> int:
        while True:
            x = self.element(q)
            if x:
                return x

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by masked rejection."""
        if n <= 0:
            raise ValueError("empty range")
        bits = (n - 1).bit_length()
        if bits > 64:
            raise ValueError("range wider than 64 bits")
        mask = (1 << bits) - 1
        while True:
            x = self.u64() & mask
            if x < n:
                return x

    def between(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return lo + self.below(hi - lo + 1)
