"""Deterministic random streams.

All randomness in the toolkit flows through PCG64 generators derived from an
explicit 64-bit seed plus a tuple of string tags (stream names, dataset or
model ids, example indices). Tags are hashed with BLAKE2b-64 so the derived
streams are reproducible across platforms and independent of each other.
"""

from __future__ import annotations

import hashlib

import numpy as np

_U64 = (1 << 64) - 1


def tag_entropy(tag: object) -> int:
    """Stable 64-bit entropy word for an arbitrary tag value."""
    digest = hashlib.blake2b(str(tag).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def rng_for(seed: int, *tags: object) -> np.random.Generator:
    """PCG64 generator for the stream named by (seed, *tags)."""
    entropy = [int(seed) & _U64] + [tag_entropy(t) for t in tags]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
