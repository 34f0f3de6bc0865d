"""Seed derivation and RNG construction.

Every random stream is a numpy ``Generator`` over PCG64 (PCG XSL RR 128/64),
seeded with a 64-bit unsigned integer. Stage sub-seeds are the first eight
bytes, read little-endian, of SHA-256 over the ASCII text ``"<seed>/<name>"``.
"""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def derive_seed(seed: int, name: str) -> int:
    digest = hashlib.sha256(f"{int(seed) & _MASK64}/{name}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
