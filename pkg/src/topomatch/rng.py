"""Seedable, splittable random streams.

Every stream is a numpy ``Generator`` over the counter-based Philox4x64-10
bit generator, keyed by ``SeedSequence(entropy=seed, spawn_key=keys)``. Any
``(seed, keys)`` pair therefore names one reproducible substream, independent
of how many workers consume the others.
"""
from __future__ import annotations

import numpy as np


def seed_sequence(seed: int, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *keys)))


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit integer seed for the substream ``(seed, *keys)``."""
    state = seed_sequence(seed, *keys).generate_state(1, np.uint64)[0]
    return int(state >> np.uint64(1))


def fresh_seed() -> int:
    """Seed drawn from OS entropy, for runs where the user gave none."""
    return int(np.random.SeedSequence().generate_state(1, np.uint64)[0] >> np.uint64(1))
