"""Named random streams derived from a single master seed."""

import zlib

import numpy as np


def _key(names):
    return tuple(zlib.crc32(str(name).encode("utf-8")) for name in names)


def stream(seed, *names):
    """Return a Generator for the stream ``names`` under master ``seed``.

    Streams with different names are statistically independent and the
    mapping does not depend on the order in which streams are requested.
    """
    if isinstance(seed, np.random.Generator):
        if names:
            raise TypeError("named streams need an integer master seed")
        return seed
    ss = np.random.SeedSequence(int(seed), spawn_key=_key(names))
    return np.random.default_rng(ss)


def derive_seed(seed, *names):
    """Integer seed for the stream ``names``; stable across runs and platforms."""
    ss = np.random.SeedSequence(int(seed), spawn_key=_key(names))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def as_generator(seed):
    """Accept ``None``, an int, or a Generator."""
    return np.random.default_rng(seed)
