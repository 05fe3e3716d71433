"""Counter-based random streams.

All stochastic code draws from Philox generators keyed by a master seed and
an integer counter path, so replicate ``(n, r)`` of a scan always sees the
same stream no matter how the work is scheduled.
"""

import numpy as np


def _seed_sequence(seed, counters):
    if seed is None:
        raise ValueError("an explicit seed is required")
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return np.random.SeedSequence(seed, spawn_key=tuple(int(c) for c in counters))


def stream(seed, *counters):
    """Return a Philox-backed ``Generator`` for ``seed`` and a counter path."""
    return np.random.Generator(np.random.Philox(_seed_sequence(seed, counters)))


def derive_seed(seed, *counters):
    """Derive a child 64-bit seed from ``seed`` and a counter path."""
    state = _seed_sequence(seed, counters).generate_state(1, dtype=np.uint64)
    return int(state[0])
