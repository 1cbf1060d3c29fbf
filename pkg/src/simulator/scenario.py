"""Controller scenarios: per-voxel actuation phase offsets.

An offset is a pure function of ``(master_seed, scenario_id, x, y, z)``: a Philox
counter-based generator is keyed by the seed sequence of ``(master_seed, scenario_id)``
and its counter carries the lattice coordinate. Every morphology sharing a lattice
coordinate therefore sees the same offset there.
"""

import math
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from src.core.exceptions import ContractViolationError
from src.models.config import LatticeDims
from src.models.evaluation import ScenarioSpec

TWO_PI = 2.0 * math.pi
_BELOW_TWO_PI = float(np.nextafter(TWO_PI, 0.0))


@lru_cache(maxsize=4096)
def _scenario_key(master_seed: int, scenario_id: int) -> Tuple[int, int]:
    state = np.random.SeedSequence([master_seed, scenario_id]).generate_state(2, dtype=np.uint64)
    return int(state[0]), int(state[1])


def _unit_interval(master_seed: int, scenario_id: int, x: int, y: int, z: int) -> float:
    key = np.array(_scenario_key(master_seed, scenario_id), dtype=np.uint64)
    counter = np.array([0, x, y, z], dtype=np.uint64)
    raw = int(np.random.Philox(key=key, counter=counter).random_raw())
    return (raw >> 11) * (1.0 / 9007199254740992.0)


def phase_offset(scenario: ScenarioSpec, p: Tuple[int, int, int], dims: LatticeDims) -> float:
    """Phase offset in [0, 2*pi) of the voxel at lattice coordinate ``p``."""
    x, y, z = (int(c) for c in p)
    if not all(0 <= c < n for c, n in zip((x, y, z), dims.shape)):
        raise ContractViolationError(f"coordinate {p} outside lattice {dims.shape}")
    value = TWO_PI * _unit_interval(scenario.master_seed, scenario.scenario_id, x, y, z)
    return min(value, _BELOW_TWO_PI)


def phase_field(scenario: ScenarioSpec, dims: LatticeDims) -> np.ndarray:
    """Offsets for every lattice point, shaped like the morphology grid."""
    field = np.empty(dims.shape, dtype=np.float64)
    for x, y, z in np.ndindex(*dims.shape):
        field[x, y, z] = phase_offset(scenario, (x, y, z), dims)
    return field


def offset_table(
    scenario: ScenarioSpec, dims: LatticeDims, coords: np.ndarray
) -> List[Tuple[int, int, int, float]]:
    """Rows of (x, y, z, offset) for the given coordinates, in the order given."""
    return [
        (int(x), int(y), int(z), phase_offset(scenario, (x, y, z), dims)) for x, y, z in coords
    ]
