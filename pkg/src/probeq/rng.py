"""Seeded, splittable random streams.

Every randomized entry point takes an explicit integer seed. Independent
streams are derived from ``(seed, label, index)``; ``random.Random`` hashes
string seeds with SHA-512, so derived streams are reproducible across runs
and platforms.
"""

from __future__ import annotations

import random

DEFAULT_SEED = 0


def stream(seed: int, *path) -> random.Random:
    key = "/".join(str(p) for p in (seed,) + path)
    return random.Random(key)


def coerce_seed(rng_or_seed) -> int:
    """Accept either an int seed or a ``random.Random`` (from which a seed is drawn)."""
    if rng_or_seed is None:
        return DEFAULT_SEED
    if isinstance(rng_or_seed, random.Random):
        return rng_or_seed.getrandbits(63)
    return int(rng_or_seed)
