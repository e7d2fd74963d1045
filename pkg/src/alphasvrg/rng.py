"""Counter-based sample-index stream.

Iteration ``i`` (1-based) of a run seeded with ``seed`` uses the ``i``-th
output of SplitMix64 (Steele, Lea & Flood, 2014) started from state ``seed``,
mapped onto ``{0, ..., n-1}`` with Lemire's multiply-shift on the top 32 bits.
Because the stream is indexable, the numba and numpy kernels and the
reference loops draw exactly the same samples without sharing state.
"""
import numpy as np

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
S27 = np.uint64(27)
S30 = np.uint64(30)
S31 = np.uint64(31)
S32 = np.uint64(32)


def splitmix64(seeds, start, stop):
    """Raw SplitMix64 outputs ``start..stop-1`` (1-based) for each seed."""
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    steps = np.arange(start, stop, dtype=np.uint64)
    z = seeds[:, None] + steps[None, :] * GOLDEN_GAMMA
    z = (z ^ (z >> S30)) * MIX1
    z = (z ^ (z >> S27)) * MIX2
    return z ^ (z >> S31)


def sample_indices(seeds, start, stop, n):
    """Indices for iterations ``start..stop-1`` of every stream in ``seeds``.

    Returns an ``(len(seeds), stop - start)`` int64 array.
    """
    z = splitmix64(seeds, start, stop)
    return (((z >> S32) * np.uint64(n)) >> S32).astype(np.int64)


def sample_index(seed, i, n):
    return int(sample_indices([seed], i, i + 1, n)[0, 0])


def spawn_seeds(seed_stream, count):
    """Draw ``count`` 64-bit run seeds from a SeedSequence (or int entropy)."""
    if not isinstance(seed_stream, np.random.SeedSequence):
        seed_stream = np.random.SeedSequence(seed_stream)
    return seed_stream.generate_state(count, dtype=np.uint64)
