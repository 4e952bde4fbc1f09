"""Named, splittable random streams derived from one 64-bit seed.

Every random draw in the package comes from ``stream(seed, label, *index)``.
The label is hashed (BLAKE2b, 8 bytes) into a stream id, so two purposes
never share a stream and adding a new purpose never perturbs existing ones.
Integer indices select independent substreams (permutation number, block
number), which keeps results independent of how work is scheduled.
"""

from __future__ import annotations

import hashlib
import os

import numpy as np

__all__ = ["label_id", "stream", "thread_cap"]

_MASK64 = (1 << 64) - 1


def label_id(label: str) -> int:
    """Stable 64-bit id of a purpose label."""
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(seed: int, label: str, *index: int) -> np.random.Generator:
    """Return the generator for ``(seed, label, *index)``."""
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    key = (label_id(label),) + tuple(int(i) for i in index)
    ss = np.random.SeedSequence(entropy=seed & _MASK64, spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def thread_cap(default: int = 1) -> int:
    """Worker count allowed by ``HYPERSTAT_THREADS`` (at least 1)."""
    raw = os.environ.get("HYPERSTAT_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        return default
