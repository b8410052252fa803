"""Seed derivation for reproducible, order-independent replicates.

Every random stream comes from numpy's PCG64 bit generator seeded by a
``SeedSequence``. Child streams are addressed by a spawn key, e.g.
``(scan_index, replicate_index, stream)``, so a grid cell draws the same
numbers no matter which worker thread runs it or in what order.
"""
import numpy as np

BIT_GENERATOR = "PCG64"

SIGNAL_STREAM = 0
NOISE_STREAM = 1
PHENOTYPE_STREAM = 2
BACKGROUND_STREAM = 3


def child_seed(master_seed, *keys):
    """``SeedSequence`` for the stream addressed by ``keys`` under ``master_seed``."""
    if isinstance(master_seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            master_seed.entropy,
            spawn_key=tuple(master_seed.spawn_key) + tuple(int(k) for k in keys),
        )
    return np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))


def make_rng(seed):
    """Generator for an int, a ``SeedSequence`` or an existing ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.PCG64(seed))
