"""Seed splitting for randomized trials.

A trial's generator is ``numpy.random.default_rng(SeedSequence(key))`` with
``key = [master_seed, crc32(suite_name), q, d, trial_index]``.  Any trial can
therefore be replayed on its own from the five values recorded in its row.
"""

from __future__ import annotations

import zlib

import numpy as np


def trial_key(master: int, suite: str, q: int, d: int, trial: int) -> list[int]:
    return [int(master), zlib.crc32(suite.encode("utf-8")), int(q), int(d), int(trial)]


def trial_seed(master: int, suite: str, q: int, d: int, trial: int) -> int:
    """A 32-bit integer seed, convenient for CSV rows."""
    return int(np.random.SeedSequence(trial_key(master, suite, q, d, trial)).generate_state(1)[0])


def trial_rng(master: int, suite: str, q: int, d: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(trial_seed(master, suite, q, d, trial))
