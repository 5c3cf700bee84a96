"""Deterministic seeding helpers.

All sampling code takes an explicit stream; nothing in this package touches
numpy's global RNG. Derived seeds are stable 64-bit hashes so that grid
reshaping or chain reordering never changes the stream a cell sees.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a tuple of ints/strings (platform independent)."""
    payload = "\x1f".join(str(int(p)) if isinstance(p, (bool, int, np.integer)) else str(p) for p in parts)
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator or an integer seed; reject implicit/global RNG use."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit seed or numpy Generator is required")
    return np.random.default_rng(int(rng))
