"""Seed plumbing.

Every stochastic routine takes ``rng``, which may be an int seed, a
``SeedSequence`` or a ``Generator``. Child streams are derived with
``SeedSequence`` spawn keys so results never depend on scheduling order.
"""
import numpy as np


def as_generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def split(rng, k):
    """Return ``k`` independent generators derived from ``rng``."""
    if isinstance(rng, np.random.Generator):
        return list(rng.spawn(k))
    if not isinstance(rng, np.random.SeedSequence):
        rng = np.random.SeedSequence(rng)
    return [np.random.default_rng(s) for s in rng.spawn(k)]


def substream(seed, *key):
    """Generator addressed by ``(seed, key)``; independent of any other key."""
    if isinstance(seed, np.random.SeedSequence):
        ss = np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key))
    else:
        ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)
