"""Deterministic seeding and chunk-ordered Monte Carlo accumulation.

Every stochastic routine in this package draws from a generator derived
from an explicit seed plus string/integer tags. Long sample streams are
split into fixed-size chunks whose generators are derived from the chunk
counter, and partial sums are combined in chunk order. Results therefore
do not depend on how (or whether) the chunks are distributed over
workers.
"""

from __future__ import annotations

import hashlib
from typing import Callable

import numpy as np

CHUNK = 1 << 17


def _tag_int(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag)
    digest = hashlib.sha256(str(tag).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed(seed, *tags) -> int:
    """Stable 64-bit seed from a master seed and arbitrary tags.

    Uses SHA-256, not the builtin hash(), so the value is identical
    across processes and runs.
    """
    h = hashlib.sha256()
    h.update(_tag_int(seed).to_bytes(16, "little", signed=True))
    for tag in tags:
        h.update(_tag_int(tag).to_bytes(16, "little", signed=True))
    return int.from_bytes(h.digest()[:8], "little")


def generator(seed, *tags) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *tags))


def chunk_sizes(total: int, chunk: int = CHUNK):
    """Yield (index, size) covering `total` samples in fixed chunks."""
    done = 0
    idx = 0
    while done < total:
        size = min(chunk, total - done)
        yield idx, size
        done += size
        idx += 1


def mc_mean(draw: Callable[[np.random.Generator, int], np.ndarray],
            total: int, seed, *tags, chunk: int = CHUNK):
    """Chunked Monte Carlo mean with standard error.

    `draw(rng, k)` must return k samples along the first axis. Returns
    (mean, se) with se computed from the pooled second moment; both are
    arrays matching the trailing sample shape (scalars for scalar
    samples).
    """
    if total < 1:
        raise ValueError("mc_mean needs at least one sample")
    acc = None
    acc2 = None
    for idx, size in chunk_sizes(total, chunk):
        rng = generator(seed, *tags, idx)
        x = np.asarray(draw(rng, size), dtype=float)
        s = x.sum(axis=0)
        s2 = (x * x).sum(axis=0)
        if acc is None:
            acc, acc2 = s, s2
        else:
            acc = acc + s
            acc2 = acc2 + s2
    mean = acc / total
    var = np.maximum(acc2 / total - mean * mean, 0.0)
    if total > 1:
        var = var * (total / (total - 1))
    se = np.sqrt(var / total)
    if np.ndim(mean) == 0:
        return float(mean), float(se)
    return mean, se
