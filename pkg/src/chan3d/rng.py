"""Deterministic random-stream derivation for parallel-safe reproducibility."""
from __future__ import annotations

import numpy as np

# Stream tags keep unrelated parts of a run on disjoint substreams.
STREAM_DROP = 1
STREAM_LSP = 2
STREAM_LOS_STATE = 3
STREAM_SSP = 4
STREAM_FIELD = 5


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Derive an independent generator from the master seed and an integer key path.

    The same (seed, key) pair always yields the same stream, regardless of
    process or thread scheduling, so per-entity draws are reproducible under
    any worker count.
    """
    if master_seed < 0:
        raise ValueError("master seed must be non-negative")
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed)] + [int(k) for k in key])
    )
