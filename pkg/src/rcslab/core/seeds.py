"""Splittable, counter-based random streams.

Every stream is derived from ``(master seed, key...)`` through
:class:`numpy.random.SeedSequence` and drives a Philox generator, so a
sub-task's randomness depends only on its key and never on scheduling.
"""

import hashlib
from collections.abc import Iterable

import numpy as np


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """Return an independent generator for ``key`` under ``master_seed``."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def as_generator(seed: int | np.random.Generator) -> np.random.Generator:
    """Accept either an integer seed or a ready generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(int(seed))


def stable_key(parts: Iterable[object]) -> tuple[int, int]:
    """Hash printable parameters into two 32-bit words.

    Used to key per-cell streams by parameter values rather than grid
    position.
    """
    text = "|".join(repr(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little"), int.from_bytes(digest[4:8], "little")
