"""Counter-based random streams keyed by (seed, purpose, index).

Every consumer derives its own Philox generator, so a replication's draws
depend only on its index and never on scheduling order.
"""
from __future__ import annotations

import zlib

import numpy as np


def purpose_key(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def make_rng(seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, purpose_key(purpose), int(index)])
    return np.random.Generator(np.random.Philox(ss))
