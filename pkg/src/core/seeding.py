"""Derived random streams.

One master seed feeds independent streams per concern so that toggling one feature
never shifts the random numbers another feature sees.
"""

from enum import Enum
from typing import Any, Dict

import numpy as np


class Stream(int, Enum):
    POPULATION = 0
    EVOLUTION = 1
    SCENARIOS = 2


def derive_generator(seed: int, stream: Stream) -> np.random.Generator:
    """Return the generator for ``stream`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, int(stream)])))


def derive_seed(seed: int, stream: Stream) -> int:
    """Return a 64-bit integer seed for ``stream`` under ``seed``."""
    state = np.random.SeedSequence([seed, int(stream)]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def generator_state(rng: np.random.Generator) -> Dict[str, Any]:
    """Snapshot a generator's bit-generator state (JSON-serializable)."""
    return rng.bit_generator.state


def restore_generator(state: Dict[str, Any]) -> np.random.Generator:
    bit_generator = getattr(np.random, state["bit_generator"])()
    bit_generator.state = state
    return np.random.Generator(bit_generator)
