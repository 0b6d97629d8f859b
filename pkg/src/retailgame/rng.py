"""Deterministic random streams.

Every random draw in a run comes from a stream derived from the master seed
plus a tuple of integer keys and a purpose tag::

    SeedSequence([master_seed, PURPOSE[tag], *keys])  ->  PCG64

Streams for different (tag, keys) are statistically independent, so results
do not depend on the order in which timesteps or coalitions are evaluated.
"""

from __future__ import annotations

import numpy as np

# Fixed integer codes; never renumber, outputs depend on them.
PURPOSE = {
    "alpha": 1,
    "disclosure": 2,
    "coalition_mc": 3,
    "grid_search": 4,
    "profiles": 5,
    "comparison": 6,
    "expectation_mc": 7,
}

_MASK64 = (1 << 64) - 1


def stream(master_seed: int, purpose: str, *keys: int) -> np.random.Generator:
    if purpose not in PURPOSE:
        raise KeyError(f"unknown stream purpose {purpose!r}")
    entropy = [int(master_seed) & _MASK64, PURPOSE[purpose]]
    entropy.extend(int(k) & _MASK64 for k in keys)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
