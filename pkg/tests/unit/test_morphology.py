"""Tests for lattice coordinates, decoding, connectivity and the morphology document."""

from collections import deque

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.exceptions import ContractViolationError
from src.genome.activations import ActivationFunction
from src.genome.genome import ConnectionGene, CppnGenome, NodeGene, NodeKind
from src.models.config import LatticeDims
from src.models.morphology import MorphologyDocument, decode_rle, encode_rle
from src.morphology.decoders import decode_cppn
from src.morphology.voxels import (
    Morphology,
    VoxelState,
    decode,
    is_connected,
    largest_component,
    lattice_points,
    normalize_coord,
    voxel_count,
)

DIMS = LatticeDims()


def _constant(pv, m):
    return lambda points: np.tile([pv, m], (len(points), 1))


def _flood_fill_largest(occupied: np.ndarray) -> int:
    seen = np.zeros_like(occupied, dtype=bool)
    best = 0
    for start in zip(*np.nonzero(occupied)):
        if seen[start]:
            continue
        size, queue = 0, deque([start])
        seen[start] = True
        while queue:
            x, y, z = queue.popleft()
            size += 1
            for dx, dy, dz in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
                n = (x + dx, y + dy, z + dz)
                if all(0 <= n[i] < occupied.shape[i] for i in range(3)) and occupied[n] and not seen[n]:
                    seen[n] = True
                    queue.append(n)
        best = max(best, size)
    return best


def _identity_cppn() -> CppnGenome:
    """3-in/2-out CPPN whose outputs both equal sin(x)."""
    nodes = (
        NodeGene(0, NodeKind.INPUT),
        NodeGene(1, NodeKind.INPUT),
        NodeGene(2, NodeKind.INPUT),
        NodeGene(3, NodeKind.OUTPUT, ActivationFunction.SINE),
        NodeGene(4, NodeKind.OUTPUT, ActivationFunction.SINE),
    )
    connections = (ConnectionGene(0, 0, 3, 1.0), ConnectionGene(1, 0, 4, 1.0))
    return CppnGenome(0, 3, 2, nodes, connections)


class TestNormalizeCoord:
    """Index to [-1, 1] mapping."""

    @pytest.mark.parametrize("i,n,expected", [(0, 8, -1.0), (7, 8, 1.0), (3, 7, 0.0), (0, 1, 0.0)])
    def test_examples(self, i, n, expected):
        assert normalize_coord(i, n) == pytest.approx(expected)

    @pytest.mark.parametrize("i,n", [(-1, 8), (8, 8)])
    def test_out_of_range(self, i, n):
        with pytest.raises(ContractViolationError):
            normalize_coord(i, n)

    def test_lattice_points_order(self):
        points = lattice_points(DIMS)

        assert points.shape == (448, 3)
        np.testing.assert_allclose(points[0], [-1, -1, -1])
        np.testing.assert_allclose(points[1], [-1, -1, normalize_coord(1, 7)])
        np.testing.assert_allclose(points[-1], [1, 1, 1])


class TestDecode:
    """Query thresholds and finalization."""

    def test_constant_positive_fills_lattice(self):
        m = decode(_constant(1.0, 1.0), DIMS)

        assert voxel_count(m) == 448
        assert m.active_count == 448

    def test_constant_negative_is_empty(self):
        m = decode(_constant(-1.0, 5.0), DIMS)

        assert voxel_count(m) == 0
        assert m.bounding_box() is None

    def test_passive_when_material_not_positive(self):
        m = decode(_constant(0.5, 0.0), DIMS)

        assert m.passive_count == 448
        assert m.active_count == 0

    def test_half_lattice_matches_hand_loop(self):
        m = decode(lambda p: np.column_stack([p[:, 0], p[:, 0]]), DIMS)

        expected = np.zeros(DIMS.shape, dtype=np.int8)
        for x in range(8):
            if normalize_coord(x, 8) > 0:
                expected[x] = VoxelState.ACTIVE
        np.testing.assert_array_equal(m.grid, expected)
        assert voxel_count(m) == 224

    def test_shifted_half_lattice(self):
        m = decode(lambda p: np.column_stack([p[:, 0] - 0.2, p[:, 0] - 0.2]), DIMS)

        assert voxel_count(m) == 168
        assert m.bounding_box() == ((5, 0, 0), (7, 7, 6))

    def test_depends_only_on_lattice_points(self):
        def smooth(points):
            return np.column_stack([np.sin(5 * points[:, 0]), points[:, 1]])

        def bumpy(points):
            # sin(3.5 pi (c + 1)) vanishes at every normalized 8-wide lattice coordinate
            wave = np.sin(3.5 * np.pi * (points[:, :2] + 1.0))
            return smooth(points) + 5.0 * wave

        assert decode(smooth, DIMS) == decode(bumpy, DIMS)

    def test_bad_query_shape(self):
        with pytest.raises(ContractViolationError):
            decode(lambda p: np.zeros((len(p), 3)), DIMS)

    def test_decode_cppn_identity(self):
        m = decode_cppn(_identity_cppn(), DIMS)

        assert voxel_count(m) == 224
        assert m.provenance == "cppn:0"


class TestLargestComponent:
    """Face connectivity."""

    def test_block_unchanged(self):
        grid = np.zeros(DIMS.shape, dtype=np.int8)
        grid[2:4, 2:4, 0:2] = VoxelState.ACTIVE
        m = Morphology(DIMS, grid)

        assert largest_component(m) == m

    def test_diagonal_voxels_split(self):
        grid = np.zeros(DIMS.shape, dtype=np.int8)
        grid[0, 0, 0] = VoxelState.ACTIVE
        grid[1, 1, 0] = VoxelState.PASSIVE

        kept = largest_component(Morphology(DIMS, grid))

        assert voxel_count(kept) == 1
        assert kept.grid[0, 0, 0] == VoxelState.ACTIVE

    def test_empty(self):
        assert voxel_count(largest_component(Morphology.empty(DIMS))) == 0

    def test_random_grids_match_flood_fill(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            grid = np.where(rng.random(DIMS.shape) < 0.3, rng.integers(1, 3, DIMS.shape), 0).astype(np.int8)
            m = Morphology(DIMS, grid)

            kept = largest_component(m)

            assert voxel_count(kept) == _flood_fill_largest(grid != 0)
            assert largest_component(kept) == kept
            assert voxel_count(kept) <= voxel_count(m)
            assert is_connected(kept)
            assert is_connected(m) == (voxel_count(kept) == voxel_count(m))


class TestMorphologyDocument:
    """RLE document format."""

    def test_example_encoding(self):
        assert encode_rle(np.array([0, 0, 0, 2, 2, 1])) == "3E2A1P"
        np.testing.assert_array_equal(decode_rle("3E2A1P", 6), [0, 0, 0, 2, 2, 1])

    def test_x_fastest_order(self):
        dims = LatticeDims(nx=2, ny=1, nz=2)
        grid = np.zeros(dims.shape, dtype=np.int8)
        grid[1, 0, 0] = VoxelState.ACTIVE

        assert Morphology(dims, grid).to_document().voxels == "1E1A2E"

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        m = Morphology(DIMS, rng.integers(0, 3, DIMS.shape).astype(np.int8))

        assert Morphology.from_document(m.to_document()) == m

    @pytest.mark.parametrize("voxels", ["447A", "449A", "0A448A", "448X", "A448"])
    def test_invalid_runs(self, voxels):
        with pytest.raises(ValidationError):
            MorphologyDocument(dims=[8, 8, 7], voxels=voxels)

    def test_reference_morphology_count(self):
        doc = MorphologyDocument(dims=[8, 8, 7], voxels="224A224E")

        assert voxel_count(Morphology.from_document(doc)) == 224

    @pytest.mark.parametrize("dims", [[100000, 100000, 100000], [65, 1, 1], [0, 8, 7]])
    def test_lattice_extent_bounded(self, dims):
        with pytest.raises(ValidationError):
            MorphologyDocument(dims=dims, voxels="1E")

    def test_runs_checked_before_allocation(self, mocker):
        empty = mocker.spy(np, "empty")

        with pytest.raises(ValueError, match="cover 1 of 448"):
            decode_rle("1E", 448)
        assert empty.call_count == 0

    def test_grid_is_read_only(self):
        m = Morphology.empty(DIMS)

        with pytest.raises(ValueError):
            m.grid[0, 0, 0] = 1

    def test_mirror(self):
        grid = np.zeros(DIMS.shape, dtype=np.int8)
        grid[0, 0, 0] = VoxelState.ACTIVE

        assert Morphology(DIMS, grid).mirrored().grid[0, 7, 0] == VoxelState.ACTIVE
