"""Voxel morphologies on the design lattice.

Grids are int8 arrays indexed ``(x, y, z)`` holding :class:`VoxelState` codes.
"""

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import ndimage

from src.core.exceptions import ContractViolationError
from src.models.config import LatticeDims
from src.models.morphology import MorphologyDocument, decode_rle, encode_rle

# Maps an (n, 3) array of normalized lattice coordinates to (n, 2) columns (pv, m).
BatchQuery = Callable[[np.ndarray], np.ndarray]


class VoxelState(IntEnum):
    EMPTY = 0
    PASSIVE = 1
    ACTIVE = 2


@dataclass(frozen=True, eq=False)
class Morphology:
    dims: LatticeDims
    grid: np.ndarray
    provenance: Optional[str] = field(default=None)

    def __post_init__(self) -> None:
        grid = np.array(self.grid, dtype=np.int8)
        if grid.shape != self.dims.shape:
            raise ContractViolationError(
                f"grid shape {grid.shape} does not match lattice {self.dims.shape}"
            )
        if grid.size and (grid.min() < 0 or grid.max() > 2):
            raise ContractViolationError("voxel states must be 0, 1 or 2")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Morphology):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.grid, other.grid)

    __hash__ = None  # type: ignore[assignment]

    @property
    def active_count(self) -> int:
        return int(np.count_nonzero(self.grid == VoxelState.ACTIVE))

    @property
    def passive_count(self) -> int:
        return int(np.count_nonzero(self.grid == VoxelState.PASSIVE))

    def occupied(self) -> np.ndarray:
        """(k, 3) integer coordinates of non-empty voxels in C order."""
        return np.argwhere(self.grid != VoxelState.EMPTY)

    def bounding_box(self) -> Optional[Tuple[Tuple[int, int, int], Tuple[int, int, int]]]:
        """Inclusive (low, high) corners of the occupied region, None when empty."""
        cells = self.occupied()
        if cells.size == 0:
            return None
        low, high = cells.min(axis=0), cells.max(axis=0)
        return tuple(int(v) for v in low), tuple(int(v) for v in high)  # type: ignore[return-value]

    def mirrored(self, axis: int = 1) -> "Morphology":
        """Reflect the grid along lattice ``axis`` (1 mirrors across the x axis)."""
        return Morphology(self.dims, np.flip(self.grid, axis=axis), self.provenance)

    def to_document(self) -> MorphologyDocument:
        return MorphologyDocument(
            dims=list(self.dims.shape), voxels=encode_rle(self.grid.ravel(order="F"))
        )

    @classmethod
    def from_document(cls, doc: MorphologyDocument, provenance: Optional[str] = None) -> "Morphology":
        nx, ny, nz = doc.shape
        flat = decode_rle(doc.voxels, nx * ny * nz)
        return cls(LatticeDims(nx=nx, ny=ny, nz=nz), flat.reshape((nx, ny, nz), order="F"), provenance)

    @classmethod
    def empty(cls, dims: LatticeDims) -> "Morphology":
        return cls(dims, np.zeros(dims.shape, dtype=np.int8))


def normalize_coord(i: int, n: int) -> float:
    """Map lattice index ``i`` of an axis of size ``n`` onto [-1, 1]."""
    if n < 1 or not 0 <= i < n:
        raise ContractViolationError(f"index {i} outside lattice axis of size {n}")
    if n == 1:
        return 0.0
    return 2.0 * i / (n - 1) - 1.0


def lattice_points(dims: LatticeDims) -> np.ndarray:
    """Normalized (x, y, z) coordinates of every lattice point, C order over (x, y, z)."""
    axes = [
        np.array([normalize_coord(i, n) for i in range(n)], dtype=np.float64)
        for n in dims.shape
    ]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def voxel_count(m: Morphology) -> int:
    return int(np.count_nonzero(m.grid))


def is_connected(m: Morphology) -> bool:
    """True when the non-empty voxels form at most one face-connected component."""
    _, count = ndimage.label(m.grid != VoxelState.EMPTY)
    return count <= 1


def largest_component(m: Morphology) -> Morphology:
    """Keep the largest face-connected component of non-empty voxels.

    Labels are assigned in C-order scan, so among equally large components the one
    holding the lexicographically lowest (x, y, z) voxel has the lowest label and wins.
    """
    occupied = m.grid != VoxelState.EMPTY
    labels, count = ndimage.label(occupied)
    if count <= 1:
        return m
    sizes = np.bincount(labels.ravel())[1:]
    keep = int(np.argmax(sizes)) + 1
    grid = np.where(labels == keep, m.grid, VoxelState.EMPTY).astype(np.int8)
    return Morphology(m.dims, grid, m.provenance)


def decode(query: BatchQuery, dims: LatticeDims, provenance: Optional[str] = None) -> Morphology:
    """Query every lattice point and build the finalized morphology.

    A point is empty iff pv <= 0, otherwise active iff m > 0 and passive else.
    """
    points = lattice_points(dims)
    out = np.asarray(query(points), dtype=np.float64)
    if out.shape != (points.shape[0], 2):
        raise ContractViolationError(f"query must return shape ({points.shape[0]}, 2), got {out.shape}")
    pv, material = out[:, 0], out[:, 1]
    states = np.where(
        pv > 0.0,
        np.where(material > 0.0, VoxelState.ACTIVE, VoxelState.PASSIVE),
        VoxelState.EMPTY,
    ).astype(np.int8)
    raw = Morphology(dims, states.reshape(dims.shape), provenance)
    return largest_component(raw)
