"""Keyed random streams.

Every stream is a Philox counter-based generator keyed by
``(master seed, replication index, stream name)``, so replication ``i``
draws the same numbers no matter which worker runs it or in what order.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["stream", "stream_key"]


def stream_key(seed: int, replication: int, name: str = "") -> list:
    """Entropy words for a named stream; the name is folded in by CRC32."""
    if seed < 0 or replication < 0:
        raise ValueError("seed and replication index must be non-negative")
    seed = int(seed)
    return [seed & 0xFFFFFFFF, seed >> 32 & 0xFFFFFFFF, int(replication), zlib.crc32(name.encode())]


def stream(seed: int, replication: int = 0, name: str = "") -> np.random.Generator:
    ss = np.random.SeedSequence(stream_key(seed, replication, name))
    return np.random.Generator(np.random.Philox(ss))
