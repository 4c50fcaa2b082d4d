"""Deterministic random streams with stable substream derivation.

Every stochastic operation in the package draws from a ``RandomSource``.
Substreams are derived by hashing the parent seed together with arbitrary
labels, so adding a new consumer (a strategy, an extra run) never perturbs
the draws of existing ones.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, *labels) -> int:
    """Stable 64-bit seed from a parent seed and hashable labels.

    Uses a keyed hash of the repr, which is stable across platforms and
    Python versions for ints, floats, strings, and tuples thereof.
    """
    payload = repr((int(seed) & _MASK64, labels)).encode("utf-8")
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "big")


class RandomSource:
    """Seeded uniform-[0,1) stream (PCG64).

    The same seed yields the same draw sequence on every platform.
    Concurrent consumers must each hold their own instance.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def derive(self, *labels) -> RandomSource:
        """Independent substream keyed by (seed, labels)."""
        return RandomSource(derive_seed(self.seed, *labels))

    def uniform(self, size=None):
        return self._gen.random(size)

    def integers(self, low: int, high: int | None = None, size=None):
        return self._gen.integers(low, high, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def normal(self, size=None):
        return self._gen.standard_normal(size)

    def dirichlet(self, alpha) -> np.ndarray:
        return self._gen.dirichlet(alpha)

    def multinomial(self, n: int, pvals) -> np.ndarray:
        return self._gen.multinomial(n, pvals)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed})"
