"""Keyed random streams.

``default_rng([seed, 0, 0])`` and ``default_rng(seed)`` share a state, so
derived streams go through ``spawn_key`` with a per-purpose tag instead.
"""
import numpy as np

KMEANS = 1
RESAMPLE = 2
REPLICATION = 3


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))
