"""Named random sub-streams derived from a single run seed.

Every source of randomness in a run (weight initialisation, sample
scheduling, stochastic activations, evaluation-image selection) draws
from its own child stream, so enabling one feature never perturbs the
draws of another.
"""

import numpy as np

# Fixed registry: the spawn key of each stream must never change, or old
# runs stop being reproducible.
_STREAMS = {
    "init": 0,
    "schedule": 1,
    "stochastic": 2,
    "eval": 3,
    "subset": 4,
}


def substream(seed: int, name: str) -> np.random.Generator:
    """Return the named child generator of ``seed``."""
    if name not in _STREAMS:
        raise ValueError(f"unknown random stream {name!r}; known: {sorted(_STREAMS)}")
    seq = np.random.SeedSequence(int(seed), spawn_key=(_STREAMS[name],))
    return np.random.Generator(np.random.PCG64(seq))
