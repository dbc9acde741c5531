"""Deterministic random-stream derivation.

Every stochastic component draws from a stream derived from a master seed
plus a structured key (run index, policy name, step, candidate, ...).  A
stream is a pure function of (master_seed, key), so results are
bit-identical regardless of evaluation order or worker count.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_part(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"stream key parts must be non-negative, got {part}")
        return int(part)
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    raise TypeError(f"unsupported stream key part: {part!r}")


def derive_rng(master_seed: int, *key) -> np.random.Generator:
    """Return the generator for stream ``key`` under ``master_seed``."""
    spawn_key = tuple(_key_part(p) for p in key)
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=spawn_key))
