"""
Named random streams.

Each consumer (channel, traffic, interference, user) draws from its own
generator derived from (seed, name) only, so adding a stream or changing
dispatch order never perturbs the draws of another stream.
"""
import zlib
from typing import Dict, Sequence

import numpy as np

CHANNEL = "channel"
TRAFFIC = "traffic"
INTERFERENCE = "interference"
USER = "user"


def stream_key(name: str) -> int:
    """Stable 32-bit key for a stream label (``hash()`` is salted per process)."""
    return zlib.crc32(name.encode("utf-8"))


class RngStreams:
    """Factory and cache of per-consumer ``numpy.random.Generator`` objects."""

    def __init__(self, seed: int) -> None:
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self._streams: Dict[str, np.random.Generator] = {}

    def stream(self, name: str) -> np.random.Generator:
        """Generator for ``name``; the same object is returned on every call."""
        if name not in self._streams:
            sequence = np.random.SeedSequence(self.seed, spawn_key=(stream_key(name),))
            self._streams[name] = np.random.default_rng(sequence)
        return self._streams[name]

    def keyed(self, name: str, key: Sequence[int]) -> np.random.Generator:
        """
        Fresh generator for a (stream, key) cell.

        Used where a draw must not depend on how many other draws came first,
        e.g. the shadowing value of one coherence interval.
        """
        spawn_key = (stream_key(name),) + tuple(int(k) for k in key)
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=spawn_key))
