"""Counter-based random streams.

Every Monte Carlo routine derives one Philox stream per replicate from
(seed, replicate index), so results are identical no matter how replicates
are batched or distributed.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_MASK32 = (1 << 32) - 1


def _seed_sequence(seed: int, path: tuple[int, ...]) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        int(seed) & _MASK64, spawn_key=tuple(int(p) & _MASK32 for p in path)
    )


def substream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the Philox stream keyed by (seed, *path)."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, path)))


def derived_seed(seed: int, *path: int) -> int:
    """A 64-bit child seed, a pure function of (seed, *path)."""
    return int(_seed_sequence(seed, path).generate_state(1, np.uint64)[0])
