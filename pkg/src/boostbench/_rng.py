"""Seeded random streams.

Every randomized step draws from ``numpy.random.Generator(PCG64(...))``.
PCG64 output is specified bit-for-bit by numpy and is identical on every
platform, so results depend only on ``(input, seed)``.  Child streams are
derived with :class:`numpy.random.SeedSequence` from a master seed plus a
path of integer or string keys; strings are hashed with BLAKE2b, never with
the process-randomized builtin ``hash``.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _key_to_int(key: int | str) -> int:
    if isinstance(key, str):
        digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    return int(key) & _MASK64


def derive_seed(seed: int, *keys: int | str) -> int:
    """Return a 64-bit seed derived from ``seed`` and ``keys``."""
    if not keys:
        return int(seed) & _MASK64
    seq = np.random.SeedSequence(
        entropy=int(seed) & _MASK64, spawn_key=tuple(_key_to_int(k) for k in keys)
    )
    lo, hi = seq.generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


def make_rng(seed: int, *keys: int | str) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *keys)))
