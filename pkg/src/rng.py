"""Seeding of the per-replicate random number generators.

Replicate r of a batch run draws from a Philox (counter-based) generator keyed
by hashing (seed, r) through numpy's SeedSequence. The stream of a replicate
therefore depends only on the seed and its index, never on the execution order
or the number of worker threads.
"""

import numpy as np

__all__ = ["MAX_SEED", "child_generator", "root_generator", "validate_seed"]

MAX_SEED = 2 ** 64 - 1


def validate_seed(seed: int) -> int:
    """Check that a seed fits in 64 bits and return it as an int"""
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def child_generator(seed: int, index: int) -> np.random.Generator:
    """
    Return the generator of replicate `index` under `seed`.

    Args:
        seed: 64-bit master seed of the run
        index: replicate counter

    Returns:
        Philox-backed generator for that replicate
    """
    sequence = np.random.SeedSequence(entropy=validate_seed(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(sequence))


def root_generator(seed: int) -> np.random.Generator:
    """Generator for single-shot draws outside a batch"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=validate_seed(seed))))
