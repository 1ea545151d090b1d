"""Named, reproducible random streams derived from one integer seed."""
import zlib

import numpy as np


def derive_rng(seed: int, name: str, *extra: int) -> np.random.Generator:
    """Generator for the sub-stream ``name`` (plus optional integer keys) of ``seed``."""
    return np.random.default_rng([int(seed), zlib.crc32(name.encode()), *map(int, extra)])
