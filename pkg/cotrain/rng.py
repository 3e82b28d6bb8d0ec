import zlib
from typing import Optional, Union

import numpy as np

SeedKey = Union[int, str]

_MASK64 = (1 << 64) - 1


def _key_word(key: SeedKey) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    return int(key) & _MASK64


def derive_seed(seed: int, *keys: SeedKey) -> int:
    """Derive an independent 64-bit child seed from a parent seed and a key path.

    Same (seed, keys) always gives the same child, on every platform.
    """
    entropy = [int(seed) & _MASK64] + [_key_word(k) for k in keys]
    lo, hi = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return (int(hi) << 32) | int(lo)


def new_rng(seed: Optional[int] = None) -> np.random.Generator:
    """Seeded generator to keep deterministic behavior."""
    return np.random.default_rng(seed)
