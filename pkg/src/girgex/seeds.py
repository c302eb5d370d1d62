"""Deterministic, collision-resistant seed derivation for rng streams.

Every independent random stream in a run is seeded from a hash of the
master seed plus a tuple of context labels (network id, model id, replicate,
purpose), so reruns are byte-reproducible and streams never collide.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["derive_seed", "derive_rng"]


def derive_seed(*parts) -> int:
    text = "/".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def derive_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))
