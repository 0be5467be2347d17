"""Deterministic random-stream helpers.

Sampling decisions are keyed on (seed, record id) rather than a shared
stream so that per-record decisions are independent of iteration order and
agree between serial and parallel runs.
"""

from __future__ import annotations

import random


def record_rng(seed: int, record_id: str) -> random.Random:
    """Return an RNG derived from a base seed and a record identifier.

    Seeding ``random.Random`` with a string hashes it with SHA-512, so the
    stream is stable across processes and platforms.
    """
    return random.Random(f"{seed}:{record_id}")


def record_uniform(seed: int, record_id: str) -> float:
    """One uniform draw in [0, 1) for a record, stable under reordering."""
    return record_rng(seed, record_id).random()
