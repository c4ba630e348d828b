"""
Per-purpose random streams derived from one master seed.

Each consumer keys its stream by a fixed purpose label plus its own coordinates
(epoch, sample id, ...), so switching one mechanism on or off never shifts the
draws of another.
"""

from enum import IntEnum

import numpy as np


class Purpose(IntEnum):
    DATASET = 0
    ORDER = 1
    AUGMENT = 2
    INIT = 3


def seed_sequence(master_seed: int, purpose: Purpose, *keys: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(master_seed), int(purpose), *(int(k) for k in keys)])


def stream(master_seed: int, purpose: Purpose, *keys: int) -> np.random.Generator:
    return np.random.default_rng(seed_sequence(master_seed, purpose, *keys))
