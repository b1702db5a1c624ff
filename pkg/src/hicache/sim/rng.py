"""Seeded random streams.

Every random draw in the package comes from numpy's counter-based Philox generator. A 64-bit
seed is expanded with ``numpy.random.SeedSequence`` and split into independent child streams
(one per feature dimension, one per Monte-Carlo replicate), so results do not depend on the
order in which streams are consumed or on how work is spread over processes.
"""

import numpy as np

from hicache.errors import ConfigurationError

MAX_SEED: int = 2**64 - 1


def validate_seed(seed: int) -> int:
    """Checks that ``seed`` is an unsigned 64-bit integer."""
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed <= MAX_SEED:
        raise ConfigurationError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def philox(seed: int, *key: int) -> np.random.Generator:
    """Returns the Philox generator of stream ``key`` under ``seed``.

    ``philox(seed, i)`` is the same stream as ``philox_streams(seed, n)[i]`` for any ``n > i``.
    """
    sequence = np.random.SeedSequence(validate_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(sequence))


def philox_streams(seed: int, count: int) -> list[np.random.Generator]:
    """Returns ``count`` independent Philox generators derived from ``seed``."""
    return [philox(seed, index) for index in range(count)]
