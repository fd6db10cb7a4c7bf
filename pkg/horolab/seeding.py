"""
Every random draw in horolab comes from one 64-bit experiment seed. Streams are split
by spawn keys on a counter-based Philox generator, so a worker asking for stream
("drift", 3) gets the same numbers whichever thread or process it runs in.
"""
import hashlib
from typing import Union

import numpy as np

Key = Union[int, str]


def _key_to_int(key: Key) -> int:
    if isinstance(key, int):
        return key
    m = hashlib.sha256()
    m.update(str(key).encode("UTF-8"))
    return int(m.hexdigest()[:16], 16)


def generator(seed: int, *keys: Key) -> np.random.Generator:
    sequence = np.random.SeedSequence(
        int(seed), spawn_key=tuple(_key_to_int(key) for key in keys)
    )
    return np.random.Generator(np.random.Philox(sequence))
