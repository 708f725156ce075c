"""Named random streams derived from one integer seed."""
from __future__ import annotations

import zlib

import numpy as np


def _key(name) -> int:
    if isinstance(name, (int, np.integer)):
        return int(name) & 0xFFFFFFFF
    return zlib.crc32(str(name).encode())


def stream(seed: int | None, *names) -> np.random.Generator:
    """Generator for the sub-stream ``names`` of ``seed``.

    The same ``(seed, names)`` always yields the same stream, independent of
    how many other streams were drawn before.
    """
    seed = 0 if seed is None else int(seed)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(_key(x) for x in names))
    return np.random.Generator(np.random.PCG64(ss))


def subseed(seed: int | None, *names) -> int:
    return int(stream(seed, *names).integers(0, 2**62))
