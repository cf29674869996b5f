"""Splittable random streams.

A child stream is a pure function of (seed, purpose, index): the Philox
counter-based generator keyed by a ``SeedSequence`` with that spawn key.
Replication ``i`` therefore sees the same numbers no matter how many
workers run or in which order they are scheduled.
"""

import zlib

import numpy as np


def _purpose_key(purpose):
    if isinstance(purpose, str):
        return zlib.crc32(purpose.encode())
    return int(purpose)


def child_stream(seed, index, purpose=0):
    ss = np.random.SeedSequence(int(seed), spawn_key=(_purpose_key(purpose), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng):
    """Accept a Generator, an int seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(rng)))
