"""Counter-derived random streams.

Every stochastic routine accepts either an integer seed or a ready
``numpy.random.Generator``.  Derived streams are keyed by an explicit path of
integers, so results never depend on evaluation order or worker count.
"""

from __future__ import annotations

import numpy as np


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(rng))))


def substream(seed: int, *path: int) -> np.random.Generator:
    """A generator for the stream addressed by (seed, *path)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """A stable 63-bit sub-seed for (seed, *path), for recording in outputs."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)
