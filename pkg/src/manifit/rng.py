"""Deterministic random streams for reproducible experiments.

All randomness flows through Philox, a counter-based generator, keyed by
64-bit seeds derived from a master seed with SHA-256. Derivation depends
only on the master seed and an integer index path, so per-trial streams are
reproducible regardless of execution order or worker count.
"""
from __future__ import annotations

import hashlib

import numpy as np

_PREFIX = "manifit"


def derive_seed(master_seed: int, *path: int) -> int:
    """Derive a 64-bit stream seed from a master seed and an index path.

    The derivation is ``sha256("manifit:<master>:<i0>:<i1>...")`` truncated to
    the first 8 bytes (little-endian), which is stable across platforms and
    Python versions.
    """
    text = ":".join([_PREFIX] + [str(int(p)) for p in (master_seed, *path)])
    digest = hashlib.sha256(text.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int) -> np.random.Generator:
    """Philox generator for the given stream seed."""
    return np.random.Generator(np.random.Philox(int(seed)))
