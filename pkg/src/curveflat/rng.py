"""Seed plumbing shared by the simulators and the experiment harness.

Every random stream is derived from a :class:`numpy.random.SeedSequence`,
so a (master seed, run index, stream name) triple always names the same
stream no matter how runs are scheduled.
"""

from __future__ import annotations

import random

import numpy as np

STREAMS = ("network", "epidemic", "delay", "noise")


def seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if seed is None:
        raise ValueError("an explicit seed is required")
    return np.random.SeedSequence(seed)


def py_random(seed) -> random.Random:
    """A stdlib generator; the event loop draws scalars, where it is several times cheaper than numpy."""
    words = seed_sequence(seed).generate_state(4, dtype=np.uint32)
    value = 0
    for w in words.tolist():
        value = (value << 32) | w
    return random.Random(value)


def run_streams(master_seed: int, run_index: int) -> dict[str, np.random.SeedSequence]:
    root = np.random.SeedSequence([int(master_seed), int(run_index)])
    return dict(zip(STREAMS, root.spawn(len(STREAMS))))
