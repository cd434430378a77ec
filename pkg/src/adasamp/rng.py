"""Deterministic random streams.

All randomness flows through PCG64 generators keyed by integer tuples, so a
run is reproducible bit for bit given its seed (and numpy version).
Categorical draws use inverse-CDF lookup on cumulative sums and normal draws
use the Box-Muller transform; both consume the generator's uniform stream in
an explicit, documented order instead of relying on distribution-specific
generator internals.
"""

from __future__ import annotations

import numpy as np


def make_rng(*entropy: int) -> np.random.Generator:
    """Build a generator from an integer key tuple (same key, same stream)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def categorical(rng: np.random.Generator, probs: np.ndarray, size: int) -> np.ndarray:
    """Draw `size` i.i.d. indices from `probs` by inverting the CDF.

    Zero-probability entries are never returned; a final cumulative value
    slightly below one (floating-point slack) cannot produce an out-of-range
    index because the last CDF entry is raised to at least 1.
    """
    cdf = np.cumsum(np.asarray(probs, dtype=np.float64))
    if cdf[-1] < 1.0:
        cdf[-1] = 1.0
    u = rng.random(size)
    return np.searchsorted(cdf, u, side="right").astype(np.int64)


def standard_normals(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normal draws via Box-Muller on the uniform stream."""
    shape = (size,) if np.isscalar(size) else tuple(size)
    n = int(np.prod(shape)) if shape else 1
    half = (n + 1) // 2
    u1 = rng.random(half)
    u2 = rng.random(half)
    # 1 - u1 lies in (0, 1], so the log is finite.
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:n]
    return z.reshape(shape)


def minibatch_indices(rng: np.random.Generator, n: int, batch: int) -> np.ndarray:
    """`batch` i.i.d. uniform indices in [0, n) from the uniform stream."""
    idx = (rng.random(batch) * n).astype(np.int64)
    return np.minimum(idx, n - 1)
