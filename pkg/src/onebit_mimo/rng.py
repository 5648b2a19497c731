"""Counter-based random streams keyed by (seed, index, purpose)."""
from __future__ import annotations

import zlib

import numpy as np

__all__ = ["purpose_code", "stream"]


def purpose_code(purpose: str) -> int:
    """Stable 32-bit code of a purpose tag (independent of PYTHONHASHSEED)."""
    return zlib.crc32(purpose.encode("utf-8"))


def stream(seed: int, index: int, purpose: str) -> np.random.Generator:
    """Independent Philox generator for one trial and one purpose.

    The stream depends only on its key, so trial ``index`` draws the same
    numbers no matter which worker runs it or in which order.
    """
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(purpose_code(purpose), int(index)))
    return np.random.Generator(np.random.Philox(ss))
