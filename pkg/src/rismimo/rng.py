"""Seed-derived random substreams.

Every stochastic consumer (scene drop, Monte Carlo trial, PSO run) derives its
own counter-based generator from the master seed plus a named path, so any
component can be replayed in isolation and results do not depend on execution
order or worker count.
"""
from __future__ import annotations

import zlib

import numpy as np


def _encode(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"substream path integers must be nonnegative; got {part}")
        return int(part)
    raise TypeError(f"substream path parts must be str or int; got {type(part)!r}")


def substream(seed: int, *path) -> np.random.Generator:
    """Independent Philox generator for (seed, *path).

    Identical arguments always yield an identical stream; distinct paths give
    statistically independent streams.
    """
    entropy = [_encode(seed)] + [_encode(p) for p in path]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
