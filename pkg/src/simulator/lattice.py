"""Mass-spring lattice built from a voxel morphology.

One point mass sits at every occupied voxel corner (shared between neighbours). Springs
run along voxel edges (structural) and face diagonals (shear); a spring shared by
several voxels exists once. Each spring records which active voxels contain it so
that actuation can modulate its rest length.
"""

from dataclasses import dataclass, replace
from itertools import product
from typing import Dict, List, Tuple

import numpy as np
from scipy import sparse

from src.core.exceptions import ContractViolationError
from src.models.config import SimConfig
from src.morphology.voxels import Morphology, VoxelState

_CORNERS = np.array(list(product((0, 1), repeat=3)), dtype=np.int64)


def _cube_springs() -> Tuple[List[Tuple[int, int]], List[Tuple[int, int]]]:
    """Corner-index pairs of a unit cube: 12 edges and 12 face diagonals."""
    edges, diagonals = [], []
    for a in range(8):
        for b in range(a + 1, 8):
            differing = int(np.abs(_CORNERS[a] - _CORNERS[b]).sum())
            if differing == 1:
                edges.append((a, b))
            elif differing == 2:
                diagonals.append((a, b))
    return edges, diagonals


_CUBE_EDGES, _CUBE_DIAGONALS = _cube_springs()


@dataclass
class MassSpringSystem:
    """Mutable simulation state plus the static lattice topology."""

    positions: np.ndarray  # (n, 3)
    velocities: np.ndarray  # (n, 3)
    masses: np.ndarray  # (n,)
    springs: np.ndarray  # (s, 2) node indices, first < second
    rest_lengths: np.ndarray  # (s,)
    stiffness: np.ndarray  # (s,)
    damping: np.ndarray  # (s,)
    structural: np.ndarray  # (s,) bool
    incidence: sparse.csr_matrix  # (n, s): +1 at the first node, -1 at the second
    actuation: sparse.csr_matrix  # (s, a): row means over containing active voxels
    active_voxels: np.ndarray  # (a, 3) lattice coordinates
    voxel_count: int

    @property
    def node_count(self) -> int:
        return int(self.positions.shape[0])

    @property
    def spring_count(self) -> int:
        return int(self.springs.shape[0])

    def com(self) -> np.ndarray:
        """Mass-weighted mean node position."""
        return (self.masses @ self.positions) / self.masses.sum()

    def kinetic_energy(self) -> float:
        return float(0.5 * np.sum(self.masses * np.einsum("ij,ij->i", self.velocities, self.velocities)))

    def momentum(self) -> np.ndarray:
        return self.masses @ self.velocities

    def translated(self, offset: np.ndarray) -> "MassSpringSystem":
        return replace(
            self,
            positions=self.positions + np.asarray(offset, dtype=np.float64),
            velocities=self.velocities.copy(),
        )


def build_lattice(m: Morphology, cfg: SimConfig) -> MassSpringSystem:
    """Assemble the lattice for ``m`` at rest on the ground plane.

    The body's xy bounding box is centred on the origin and its lowest layer touches
    z = 0. Rest lengths are measured from these initial positions.
    """
    voxels = m.occupied()
    if voxels.shape[0] == 0:
        raise ContractViolationError("cannot build a lattice for an empty morphology")

    corners = (voxels[:, None, :] + _CORNERS[None, :, :]).reshape(-1, 3)
    node_coords, corner_nodes = np.unique(corners, axis=0, return_inverse=True)
    corner_nodes = corner_nodes.reshape(-1, 8)

    low = node_coords.min(axis=0).astype(np.float64)
    high = node_coords.max(axis=0).astype(np.float64)
    center = np.array([(low[0] + high[0]) / 2.0, (low[1] + high[1]) / 2.0, low[2]])
    positions = (node_coords - center) * cfg.voxel_edge

    spring_index: Dict[Tuple[int, int], int] = {}
    pairs: List[Tuple[int, int]] = []
    structural: List[bool] = []
    rows: List[int] = []
    cols: List[int] = []
    active = [i for i, (x, y, z) in enumerate(voxels) if m.grid[x, y, z] == VoxelState.ACTIVE]
    active_slot = {voxel: slot for slot, voxel in enumerate(active)}

    for v, nodes in enumerate(corner_nodes):
        for is_edge, cube in ((True, _CUBE_EDGES), (False, _CUBE_DIAGONALS)):
            for a, b in cube:
                pair = (int(min(nodes[a], nodes[b])), int(max(nodes[a], nodes[b])))
                s = spring_index.get(pair)
                if s is None:
                    s = spring_index[pair] = len(pairs)
                    pairs.append(pair)
                    structural.append(is_edge)
                if v in active_slot:
                    rows.append(s)
                    cols.append(active_slot[v])

    springs = np.array(pairs, dtype=np.int64)
    is_structural = np.array(structural, dtype=bool)
    n_nodes, n_springs = positions.shape[0], springs.shape[0]
    masses = np.full(n_nodes, cfg.voxel_mass)

    stiffness = np.where(is_structural, cfg.structural_stiffness, cfg.shear_stiffness)
    damping = 2.0 * cfg.damping_ratio * np.sqrt(stiffness * cfg.voxel_mass)
    # matches Integrator.forces bit for bit
    delta = positions[springs[:, 1]] - positions[springs[:, 0]]
    rest = np.sqrt(np.einsum("ij,ij->i", delta, delta))

    spring_ids = np.arange(n_springs)
    incidence = sparse.csr_matrix(
        (
            np.concatenate([np.ones(n_springs), -np.ones(n_springs)]),
            (np.concatenate([springs[:, 0], springs[:, 1]]), np.concatenate([spring_ids, spring_ids])),
        ),
        shape=(n_nodes, n_springs),
    )

    membership = sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(n_springs, len(active))
    )
    counts = np.asarray(membership.sum(axis=1)).ravel()
    scale = np.divide(1.0, counts, out=np.zeros_like(counts), where=counts > 0)
    actuation = sparse.diags(scale) @ membership

    return MassSpringSystem(
        positions=positions,
        velocities=np.zeros_like(positions),
        masses=masses,
        springs=springs,
        rest_lengths=rest,
        stiffness=stiffness,
        damping=damping,
        structural=is_structural,
        incidence=incidence,
        actuation=sparse.csr_matrix(actuation),
        active_voxels=voxels[active] if active else np.zeros((0, 3), dtype=np.int64),
        voxel_count=int(voxels.shape[0]),
    )
