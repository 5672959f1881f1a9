"""Deterministic, addressable random streams.

A stream is identified by a pair ``(seed, stream)``.  Derived streams are
obtained by shifting the parent stream left by 64 bits and adding a child
index, so every feature, repetition and subsystem owns an independent
substream that can be reproduced in isolation without generating anything
that precedes it.

Per-feature streams are keyed by the feature *name* (hashed to a 64-bit
child index), which ties the stream to the column identity rather than
its position: permuting columns permutes the draws with them.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

_CHILD_BITS = 64
_MAX_SEED = 2**64


def name_stream(name: str) -> int:
    """Stable 64-bit child index derived from a column name."""
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def _limbs(value: int) -> tuple[int, ...]:
    # SeedSequence spawn keys are sequences of uint32 words.
    out = []
    while True:
        out.append(value & 0xFFFFFFFF)
        value >>= 32
        if value == 0:
            return tuple(out)


@dataclass(frozen=True)
class RngSeed:
    """Addressable random stream: root entropy plus a stream index."""

    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigurationError("seed must be an integer")
        if not isinstance(self.stream, int) or isinstance(self.stream, bool):
            raise ConfigurationError("stream must be an integer")
        if not 0 <= self.seed < _MAX_SEED:
            raise ConfigurationError(
                f"seed must lie in [0, 2**64), got {self.seed}"
            )
        if self.stream < 0:
            raise ConfigurationError(
                f"stream must be nonnegative, got {self.stream}"
            )

    def child(self, index: int) -> "RngSeed":
        """Substream ``index`` of this stream (index must fit in 64 bits)."""
        if not 0 <= index < 2**_CHILD_BITS:
            raise ConfigurationError(
                f"child index must lie in [0, 2**64), got {index}"
            )
        return RngSeed(self.seed, (self.stream << _CHILD_BITS) | index)

    def named_child(self, name: str) -> "RngSeed":
        """Substream keyed by a column name instead of a position."""
        return self.child(name_stream(name))

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(
            entropy=self.seed, spawn_key=_limbs(self.stream)
        )
        return np.random.default_rng(seq)
