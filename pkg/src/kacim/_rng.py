"""Seeded random streams.

Every consumer asks for a generator by ``(seed, role)``.  The role string is
hashed with CRC32 and used as the spawn key of a :class:`numpy.random.SeedSequence`,
which then seeds a counter-based Philox bit generator.  Two roles under the
same seed therefore give independent, platform-stable streams.
"""
from __future__ import annotations

import zlib

import numpy as np


def role_key(role: str) -> int:
    return zlib.crc32(role.encode("utf-8"))


def stream(seed: int, role: str, *extra: int) -> np.random.Generator:
    """Return the generator for ``role`` under ``seed`` (plus optional sub-indices)."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    ss = np.random.SeedSequence(int(seed), spawn_key=(role_key(role), *map(int, extra)))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, role: str, *extra: int) -> int:
    """Derive a child integer seed (for handing to another seeded component)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(role_key(role), *map(int, extra)))
    return int(ss.generate_state(1, dtype=np.uint32)[0])
