"""Named random streams derived from one master seed.

Every random draw in the package comes from a generator built here, keyed by
``(seed, experiment name, replicate index)``, so parallel replicates produce
the same numbers however they are scheduled.
"""
import zlib
from typing import Optional

import numpy as np

__all__ = ["derive_seed", "derive_rng"]


def derive_seed(seed: Optional[int], name: str, index: int = 0) -> np.random.SeedSequence:
    """Build the seed sequence of one named stream.

    Parameters
    ----------
    seed : Optional[int]
        Master seed. ``None`` draws fresh OS entropy.
    name : str
        Experiment or stream name.
    index : int
        Replicate index within the stream.

    Returns
    -------
    numpy.random.SeedSequence

    """
    if seed is None:
        return np.random.SeedSequence()
    return np.random.SeedSequence([int(seed), zlib.crc32(name.encode("utf-8")), int(index)])


def derive_rng(seed: Optional[int], name: str, index: int = 0) -> np.random.Generator:
    """Get a `numpy.random.Generator` for one named stream."""
    return np.random.default_rng(derive_seed(seed, name, index))
