"""Named random streams.

Every stochastic step draws from its own PCG64 generator keyed by
(seed, stream, *keys), so adding draws to one step never shifts another
and results do not depend on the order in which parallel tasks run.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Purpose of a random stream."""

    DATA = 0
    PERTURBATION = 1
    FOLDS = 2
    TRUTH = 3
    DGP = 4


def make_rng(seed: int, stream: Stream, *keys: int) -> np.random.Generator:
    """Generator for ``stream`` under master ``seed`` and integer ``keys``.

    Example:
        >>> rng = make_rng(7, Stream.DATA, 0)  # replicate 0
        >>> rng.standard_normal()  # identical on every platform
    """
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    sequence = np.random.SeedSequence(seed, spawn_key=(int(stream), *map(int, keys)))
    return np.random.Generator(np.random.PCG64(sequence))
