"""Morphology wire/archive document.

``voxels`` is a run-length encoding over the alphabet {E, P, A} (empty, passive,
active) in x-fastest order, e.g. ``"3E2A443P"``.
"""

import re
from typing import Annotated, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

SYMBOLS = "EPA"
# Largest accepted extent of any lattice axis.
MAX_AXIS = 64
_TOKEN = re.compile(r"([1-9][0-9]*)([EPA])")
_DOCUMENT = re.compile(r"(?:[1-9][0-9]*[EPA])*")


def encode_rle(states: np.ndarray) -> str:
    """Encode a flat sequence of voxel state codes (0, 1, 2)."""
    flat = np.asarray(states, dtype=np.int8).ravel()
    if flat.size == 0:
        return ""
    boundaries = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate(([0], boundaries))
    lengths = np.diff(np.concatenate((starts, [flat.size])))
    return "".join(f"{n}{SYMBOLS[flat[s]]}" for s, n in zip(starts, lengths))


def decode_rle(text: str, size: int) -> np.ndarray:
    """Decode into a flat int8 array of length ``size``."""
    if not _DOCUMENT.fullmatch(text):
        raise ValueError("voxels must be a sequence of <count><E|P|A> tokens")
    runs = [(int(count), SYMBOLS.index(symbol)) for count, symbol in _TOKEN.findall(text)]
    covered = sum(n for n, _ in runs)
    if covered != size:
        raise ValueError(f"voxel runs cover {covered} of {size} lattice points")
    out = np.empty(size, dtype=np.int8)
    cursor = 0
    for n, code in runs:
        out[cursor:cursor + n] = code
        cursor += n
    return out


class MorphologyDocument(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    dims: List[Annotated[int, Field(ge=1, le=MAX_AXIS)]] = Field(..., min_length=3, max_length=3)
    voxels: str

    @model_validator(mode="after")
    def check_runs(self) -> "MorphologyDocument":
        decode_rle(self.voxels, self.volume)
        return self

    @property
    def volume(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def shape(self) -> Tuple[int, int, int]:
        return tuple(self.dims)  # type: ignore[return-value]
