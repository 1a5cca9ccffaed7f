"""Deterministic random streams.

Every trial gets its own generator derived from ``(seed, *labels)`` so that
results never depend on iteration order or on how much randomness a
previous trial consumed.
"""
import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _word(label):
    if isinstance(label, (int, np.integer)):
        return int(label) & _MASK64
    return zlib.crc32(str(label).encode())


def derive_rng(seed, *labels):
    """Independent generator for the stream named by ``labels`` under ``seed``."""
    words = [_word(seed)] + [_word(label) for label in labels]
    return np.random.default_rng(np.random.SeedSequence(words))


def random_bits(rng, count):
    return tuple(int(b) for b in rng.integers(0, 2, size=count))
