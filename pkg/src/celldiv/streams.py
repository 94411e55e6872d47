"""Reproducible random number streams.

All randomness in the package flows through numpy Generators backed by the
Philox counter-based bit generator.  Independent streams are derived from an
integer key path ``(seed, i, j, ...)`` via ``SeedSequence(entropy=seed,
spawn_key=(i, j, ...))``, so replicate streams are uncorrelated, independent
of execution order, and identical across thread or process counts.
"""

from __future__ import annotations

import numpy as np

__all__ = ["GENERATOR_NAME", "stream", "replicate_stream"]

GENERATOR_NAME = "philox4x64-10 (numpy.random.Philox)"


def stream(seed: int, *path: int) -> np.random.Generator:
    """Generator for the stream identified by the key path (seed, *path)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def replicate_stream(seed: int, replicate: int) -> np.random.Generator:
    """Stream for replicate `replicate` of a run seeded with `seed`."""
    return stream(seed, replicate)
