"""Deterministic, order-independent randomness.

Simulation draws are keyed by what they affect (seed, reporter, target,
frame, purpose) instead of consuming a shared stream, so results do not
depend on iteration order and nested fleets stay nested when the
penetration rate grows.
"""

from __future__ import annotations

import hashlib

import numpy as np

_C1 = np.uint64(0x9E3779B97F4A7C15)
_C2 = np.uint64(0xBF58476D1CE4E5B9)
_C3 = np.uint64(0x94D049BB133111EB)
_INV = 1.0 / 2.0**64

DROPOUT_SALT = 0x6472
SPEED_SALT = 0x7370


def stable_id(text: str) -> int:
    """Stable 64-bit key for a string (process-independent)."""
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")


def derive_seed(master: int, label: str) -> int:
    """Named substream seed from a master seed."""
    return int.from_bytes(
        hashlib.sha256(f"{master}|{label}".encode()).digest()[:8], "little"
    )


def _mix(h: np.ndarray) -> np.ndarray:
    h = (h + _C1) & np.uint64(0xFFFFFFFFFFFFFFFF)
    h = (h ^ (h >> np.uint64(30))) * _C2
    h = (h ^ (h >> np.uint64(27))) * _C3
    return h ^ (h >> np.uint64(31))


def hash_uniform(seed: int, *keys: int) -> float:
    """One uniform in [0, 1) from integer keys."""
    return float(hash_uniforms(seed, np.zeros(1, dtype=np.uint64), *keys)[0])


def hash_uniforms(seed: int, key_array, *keys: int) -> np.ndarray:
    """Uniforms in [0, 1), one per element of `key_array`, keyed by all args."""
    h = np.asarray(key_array, dtype=np.uint64).copy()
    h = _mix(h)
    h ^= _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    for k in keys:
        h = _mix(h ^ np.uint64(k & 0xFFFFFFFFFFFFFFFF))
    return _mix(h) * _INV
