"""Counter-based random streams.

Draw ``k`` of repetition ``r`` is a pure function of ``(master_seed, r, k)``,
so any split of repetitions across workers reproduces the same numbers.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_keys(master_seed: int, reps: np.ndarray) -> np.ndarray:
    """One 64-bit key per repetition index."""
    seed = np.uint64(int(master_seed) & _MASK64)
    reps = np.asarray(reps, dtype=np.uint64)
    with np.errstate(over="ignore"):
        base = _mix(np.array([seed], dtype=np.uint64) + _GOLDEN)
        return _mix(base ^ _mix((reps + np.uint64(1)) * _GOLDEN))


def random_bits(master_seed: int, reps: np.ndarray, n_draws: int) -> np.ndarray:
    """uint64 array of shape (len(reps), n_draws)."""
    keys = stream_keys(master_seed, reps)
    counters = np.arange(1, n_draws + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(keys[:, None] + counters[None, :] * _GOLDEN)


def uniform_indices(master_seed: int, reps: np.ndarray, n_draws: int, n: int) -> np.ndarray:
    """Indices in [0, n) drawn uniformly, shape (len(reps), n_draws)."""
    if not 1 <= n < 2**32:
        raise ValueError(f"population size must be in [1, 2**32), got {n}")
    bits = random_bits(master_seed, reps, n_draws) >> np.uint64(32)
    # Multiply-shift maps 32 random bits onto [0, n) with bias below n / 2**32.
    return ((bits * np.uint64(n)) >> np.uint64(32)).astype(np.int64)


def uniform01(master_seed: int, reps: np.ndarray, n_draws: int) -> np.ndarray:
    bits = random_bits(master_seed, reps, n_draws) >> np.uint64(11)
    return bits.astype(np.float64) * (1.0 / 2**53)
