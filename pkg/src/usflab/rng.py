"""Seeded random streams.

Per-sample substreams are derived with a SplitMix64 finalizer::

    substream_seed(seed, index) = splitmix64((seed + (index + 1) * 0x9E3779B97F4A7C15) mod 2**64)

where ``splitmix64(z)`` is the standard 64-bit mixer (xor-shift 30/27/31
with multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB).  Each stream
is a :class:`random.Random` seeded with that value, so integer draws via
``randrange`` are exact and unbiased.
"""

from __future__ import annotations

import random

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def substream_seed(seed: int, index: int) -> int:
    return splitmix64((seed + (index + 1) * GOLDEN) & MASK64)


class RngHandle:
    """Deterministic random stream seeded by a 64-bit integer."""

    __slots__ = ("seed", "_random")

    def __init__(self, seed: int = 0):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        self.seed = seed
        self._random = random.Random(seed)

    def __repr__(self) -> str:
        return f"RngHandle(seed={self.seed})"

    def spawn(self, index: int) -> "RngHandle":
        """Independent substream for ``(seed, index)``; does not advance self."""
        return RngHandle(substream_seed(self.seed, index))

    def randbelow(self, n: int) -> int:
        return self._random.randrange(n)

    def random(self) -> float:
        return self._random.random()

    def choice(self, seq):
        return seq[self._random.randrange(len(seq))]


def as_rng(rng) -> RngHandle:
    if isinstance(rng, RngHandle):
        return rng
    if rng is None:
        return RngHandle(0)
    return RngHandle(int(rng))
