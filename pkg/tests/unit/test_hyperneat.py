"""Tests for substrate painting and substrate queries."""

import numpy as np
import pytest
from pydantic import ValidationError

from src.core.exceptions import ContractViolationError
from src.genome.activations import ActivationFunction
from src.genome.genome import ConnectionGene, CppnGenome, NodeGene, NodeKind, activate, initial_genome
from src.genome.innovation import InnovationRegistry
from src.hyperneat.substrate import (
    PhenotypeNetwork,
    neuron_coordinates,
    paint,
    query_substrate,
    query_substrate_batch,
    scale_weight,
)
from src.models.config import GenomeMode, LatticeDims, NeatParams, PaintingConfig, SubstrateLayout
from src.morphology.decoders import decode_substrate

LAYOUT = SubstrateLayout()
PAINTING = PaintingConfig()


def _hyper_cppn(activation, connections=()):
    nodes = tuple(NodeGene(i, NodeKind.INPUT) for i in range(5)) + (NodeGene(5, NodeKind.OUTPUT, activation),)
    return CppnGenome(0, 5, 1, nodes, tuple(connections))


def _random_network(rng, layout=LAYOUT):
    sizes = layout.layer_sizes
    weights = tuple(rng.uniform(-3, 3, (sizes[k + 1], sizes[k])) for k in range(len(sizes) - 1))
    return PhenotypeNetwork(layout, weights)


def _naive_query(net, point):
    h = list(point)
    for w in net.weights:
        h = [max(0.0, sum(w[j][i] * h[i] for i in range(len(h)))) for j in range(len(w))]
    return h


class TestLayout:
    """Substrate layout validation."""

    @pytest.mark.parametrize("sizes", [(3, 2), (2, 5, 2), (3, 5, 3), (3, 8, 2), (3,) + (1,) * 8 + (2,)])
    def test_rejected(self, sizes):
        with pytest.raises(ValidationError):
            SubstrateLayout(layer_sizes=sizes)

    def test_neuron_coordinates(self):
        coords = neuron_coordinates(SubstrateLayout(layer_sizes=(3, 1, 2)))

        np.testing.assert_allclose(coords[0], [[-1, -1], [-1, 0], [-1, 1]])
        np.testing.assert_allclose(coords[1], [[0, 0]])
        np.testing.assert_allclose(coords[2], [[1, -1], [1, 1]])

    def test_threshold_must_stay_below_range(self):
        with pytest.raises(ValidationError):
            PaintingConfig(weight_threshold=0.5, weight_range=0.4)


class TestPaint:
    """CPPN output to substrate weights."""

    def test_zero_output_paints_nothing(self):
        net = paint(_hyper_cppn(ActivationFunction.SINE), LAYOUT, PAINTING)

        assert all(np.all(w == 0.0) for w in net.weights)

    def test_unit_output_paints_full_range(self):
        cppn = _hyper_cppn(ActivationFunction.ABSOLUTE, [ConnectionGene(0, 4, 5, 1.0)])

        net = paint(cppn, LAYOUT, PAINTING)

        for w in net.weights:
            np.testing.assert_allclose(w, 3.0)

    def test_first_input_pattern_matches_pair_loop(self):
        cppn = _hyper_cppn(ActivationFunction.SINE, [ConnectionGene(0, 0, 5, 1.0)])

        net = paint(cppn, LAYOUT, PAINTING)

        coords = neuron_coordinates(LAYOUT)
        for k, w in enumerate(net.weights):
            assert np.all(w == w[0, 0])
            for t, (u2, v2) in enumerate(coords[k + 1]):
                for s, (u1, v1) in enumerate(coords[k]):
                    raw = activate(cppn, [u1, v1, u2, v2, 1.0])[0]
                    assert w[t, s] == pytest.approx(float(scale_weight(np.array(raw), PAINTING)), abs=1e-12)

    def test_scale_weight(self):
        raw = np.array([0.2, -0.2, 0.6, -1.0, 4.0])

        np.testing.assert_allclose(scale_weight(raw, PAINTING), [0.0, 0.0, 1.5, -3.0, 3.0])

    def test_random_cppns_respect_range_and_are_deterministic(self):
        params = NeatParams()
        for seed in range(10):
            rng = np.random.default_rng(seed)
            cppn = initial_genome(seed, GenomeMode.HYPERNEAT, params, rng, InnovationRegistry())

            first = paint(cppn, LAYOUT, PAINTING)
            second = paint(cppn, LAYOUT, PAINTING)

            for a, b in zip(first.weights, second.weights):
                assert np.all(np.abs(a) <= PAINTING.weight_range)
                np.testing.assert_array_equal(a, b)

    def test_neat_cppn_rejected(self):
        params = NeatParams()
        cppn = initial_genome(0, GenomeMode.NEAT, params, np.random.default_rng(0), InnovationRegistry())

        with pytest.raises(ContractViolationError):
            paint(cppn, LAYOUT, PAINTING)

    def test_bad_weight_shapes_rejected(self):
        with pytest.raises(ContractViolationError):
            PhenotypeNetwork(SubstrateLayout(layer_sizes=(3, 1, 2)), (np.zeros((1, 3)), np.zeros((1, 2))))


class TestQuery:
    """Forward pass through the painted substrate."""

    def test_zero_network(self):
        net = PhenotypeNetwork(LAYOUT, tuple(np.zeros((LAYOUT.layer_sizes[k + 1], LAYOUT.layer_sizes[k])) for k in range(3)))

        assert query_substrate(net, 0.3, -0.2, 0.9) == (0.0, 0.0)

    def test_hand_computed_chain(self):
        layout = SubstrateLayout(layer_sizes=(3, 1, 2))
        net = PhenotypeNetwork(layout, (np.array([[1.0, 0.0, 0.0]]), np.array([[2.0], [-1.0]])))

        assert query_substrate(net, 0.5, 0.9, -0.4) == (1.0, 0.0)
        assert query_substrate(net, -0.5, 0.9, -0.4) == (0.0, 0.0)

    def test_random_networks_match_naive_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            net = _random_network(rng)
            points = rng.uniform(-1, 1, (20, 3))

            batch = query_substrate_batch(net, points)

            for point, row in zip(points, batch):
                np.testing.assert_allclose(row, _naive_query(net, point), atol=1e-12)

    def test_lipschitz_bound(self):
        rng = np.random.default_rng(9)
        net = _random_network(rng)
        bound = np.prod([np.abs(w).sum(axis=1).max() for w in net.weights])
        point = rng.uniform(-1, 1, 3)
        delta = 1e-6

        moved = query_substrate_batch(net, np.array([point, point + delta]))

        assert np.max(np.abs(moved[1] - moved[0])) <= bound * delta * (1 + 1e-9)

    def test_decode_substrate_produces_connected_body(self):
        cppn = _hyper_cppn(ActivationFunction.ABSOLUTE, [ConnectionGene(0, 4, 5, 1.0)])

        m = decode_substrate(cppn, LAYOUT, PAINTING, LatticeDims())

        assert m.provenance == "substrate:0"
        assert m.grid.shape == (8, 8, 7)
