"""Deterministic random streams.

Each simulated object (walk path, branching run, Yule clock sequence) owns a
counter-based Philox stream keyed by (seed, stream kind, path index).  Streams
are independent across indices and kinds, order-insensitive, and safe to use
from parallel workers without shared state.
"""

from __future__ import annotations

import numpy as np

WALK = 0
BRANCHING = 1
YULE = 2
GENERIC = 3


def stream(seed: int, kind: int = GENERIC, path_index: int = 0) -> np.random.Generator:
    """Generator for the (seed, kind, path_index) stream."""
    if seed < 0 or path_index < 0:
        raise ValueError("seed and path_index must be nonnegative")
    ss = np.random.SeedSequence(entropy=(int(seed), int(kind), int(path_index)))
    return np.random.Generator(np.random.Philox(ss))


def exponential_from_uniform(u: np.ndarray) -> np.ndarray:
    """Exp(1) variates from uniforms via inversion; -log1p(-u) keeps full
    precision near u = 0."""
    return -np.log1p(-u)
