"""Tests for CPPN genomes, activation and the NEAT genetic operators."""

import math

import numpy as np
import pytest

from src.core.exceptions import ContractViolationError, MalformedGenomeError
from src.genome import operators
from src.genome.activations import ActivationFunction
from src.genome.genome import (
    ConnectionGene,
    CppnGenome,
    NodeGene,
    NodeKind,
    activate,
    activate_batch,
    initial_genome,
    validate_genome,
)
from src.genome.innovation import InnovationRegistry
from src.genome.operators import crossover, distance, mutate
from src.models.config import GenomeMode, NeatParams

ZERO_RATES = dict(
    activation_mutate_rate=0.0,
    add_connection_rate=0.0,
    delete_connection_rate=0.0,
    toggle_connection_rate=0.0,
    add_node_rate=0.0,
    delete_node_rate=0.0,
    weight_mutate_rate=0.0,
    bias_mutate_rate=0.0,
)


def _neat_nodes(out_activation=ActivationFunction.SIGMOID):
    return (
        NodeGene(0, NodeKind.INPUT),
        NodeGene(1, NodeKind.INPUT),
        NodeGene(2, NodeKind.INPUT),
        NodeGene(3, NodeKind.OUTPUT, out_activation),
        NodeGene(4, NodeKind.OUTPUT, out_activation),
    )


def _random_genome(seed: int, steps: int = 30, mode: GenomeMode = GenomeMode.NEAT) -> CppnGenome:
    rng = np.random.default_rng(seed)
    registry = InnovationRegistry()
    params = NeatParams(add_node_rate=0.5, add_connection_rate=0.8, delete_node_rate=0.1)
    genome = initial_genome(seed, mode, params, rng, registry)
    for _ in range(steps):
        genome = mutate(genome, params, rng, registry)
    return genome


def _naive_activate(genome: CppnGenome, inputs):
    """Recursive evaluation straight from the gene lists."""
    nodes = {n.id: n for n in genome.nodes}
    cache = {}

    def value(node_id):
        if node_id in cache:
            return cache[node_id]
        node = nodes[node_id]
        if node.kind is NodeKind.INPUT:
            result = float(inputs[node_id])
        else:
            total = node.bias
            for conn in genome.connections:
                if conn.enabled and conn.target == node_id:
                    total += conn.weight * value(conn.source)
            result = float(node.activation(max(-1e100, min(1e100, total))))
        cache[node_id] = result
        return result

    return [value(i) for i in genome.output_ids]


def _naive_distance(a: CppnGenome, b: CppnGenome, params: NeatParams) -> float:
    genes_a = {c.innovation: c for c in a.connections}
    genes_b = {c.innovation: c for c in b.connections}
    matching = [i for i in genes_a if i in genes_b]
    non_matching = len([i for i in genes_a if i not in genes_b]) + len(
        [i for i in genes_b if i not in genes_a]
    )
    n = max(len(genes_a), len(genes_b))
    n = 1 if n < 20 else n
    w = 0.0
    if matching:
        w = sum(abs(genes_a[i].weight - genes_b[i].weight) for i in matching) / len(matching)
    nodes_b = {n.id: n for n in b.nodes}
    for node in a.nodes:
        if node.id in nodes_b and nodes_b[node.id].activation != node.activation:
            w += 1
    return params.disjoint_coefficient * non_matching / n + params.weight_coefficient * w


class TestActivationFunctions:
    """Activation function ranges."""

    def test_sigmoid_range(self):
        values = ActivationFunction.SIGMOID(np.linspace(-30, 30, 61))
        assert np.all((values > 0) & (values < 1))
        assert ActivationFunction.SIGMOID(0.0) == 0.5

    @pytest.mark.parametrize("fn", list(ActivationFunction))
    def test_finite_on_extreme_inputs(self, fn):
        x = np.array([-1e100, -1.0, 0.0, 1.0, 1e100])
        assert np.all(np.isfinite(fn(x)))

    def test_non_negative_functions(self):
        x = np.linspace(-5, 5, 41)
        assert np.all(ActivationFunction.RELU(x) >= 0)
        assert np.all(ActivationFunction.SQRT_ABSOLUTE(x) >= 0)


class TestActivate:
    """Feed-forward activation."""

    def test_single_square_connection(self):
        genome = CppnGenome(
            0, 3, 2,
            _neat_nodes(ActivationFunction.SQUARE),
            (ConnectionGene(0, 0, 3, 1.0),),
        )
        assert activate(genome, [2.0, 0.0, 0.0])[0] == 4.0

    def test_no_connections_gives_sigmoid_of_zero(self):
        genome = CppnGenome(0, 3, 2, _neat_nodes(), ())
        assert activate(genome, [0.3, -0.2, 0.9]) == [0.5, 0.5]

    def test_input_length_mismatch(self):
        genome = CppnGenome(0, 3, 2, _neat_nodes(), ())
        with pytest.raises(ContractViolationError):
            activate(genome, [1.0, 2.0])

    def test_non_finite_input_rejected(self):
        genome = CppnGenome(0, 3, 2, _neat_nodes(), ())
        with pytest.raises(ContractViolationError):
            activate(genome, [math.nan, 0.0, 0.0])

    def test_cycle_is_malformed(self):
        nodes = _neat_nodes() + (
            NodeGene(5, NodeKind.HIDDEN, ActivationFunction.SINE),
            NodeGene(6, NodeKind.HIDDEN, ActivationFunction.SINE),
        )
        connections = (
            ConnectionGene(0, 0, 5, 1.0),
            ConnectionGene(1, 5, 6, 1.0),
            ConnectionGene(2, 6, 5, 1.0),
            ConnectionGene(3, 6, 3, 1.0),
        )
        genome = CppnGenome(0, 3, 2, nodes, connections)
        with pytest.raises(MalformedGenomeError):
            activate(genome, [1.0, 0.0, 0.0])

    def test_disabled_back_edge_is_ignored(self):
        nodes = _neat_nodes() + (NodeGene(5, NodeKind.HIDDEN, ActivationFunction.ABSOLUTE),)
        connections = (
            ConnectionGene(0, 0, 5, 1.0),
            ConnectionGene(1, 5, 3, 2.0),
            ConnectionGene(2, 3, 5, 1.0, enabled=False),
        )
        genome = CppnGenome(0, 3, 2, nodes, connections)
        out = activate(genome, [-1.5, 0.0, 0.0])
        assert out[0] == pytest.approx(1.0 / (1.0 + math.exp(-3.0)))

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_recursive_oracle(self, seed):
        genome = _random_genome(seed)
        rng = np.random.default_rng(100 + seed)
        points = rng.uniform(-1, 1, size=(20, 3))
        batch = activate_batch(genome, points)
        for point, row in zip(points, batch):
            expected = _naive_activate(genome, point)
            np.testing.assert_allclose(row, expected, rtol=1e-12, atol=1e-12)

    def test_activate_is_pure(self):
        genome = _random_genome(7)
        first = activate(genome, [0.1, 0.2, 0.3])
        second = activate(genome, [0.1, 0.2, 0.3])
        assert first == second


class TestInitialGenome:
    """Initial population genomes."""

    @pytest.mark.parametrize("mode", list(GenomeMode))
    def test_fully_connected(self, mode):
        rng = np.random.default_rng(0)
        genome = initial_genome(0, mode, NeatParams(), rng, InnovationRegistry())
        assert len(genome.connections) == mode.input_count * mode.output_count
        assert not genome.hidden_ids
        assert all(-1.0 <= c.weight <= 1.0 for c in genome.connections)
        assert all(n.bias == 0.0 for n in genome.nodes)
        validate_genome(genome)

    def test_population_shares_innovation_numbers(self):
        rng = np.random.default_rng(0)
        registry = InnovationRegistry()
        a = initial_genome(0, GenomeMode.NEAT, NeatParams(), rng, registry)
        b = initial_genome(1, GenomeMode.NEAT, NeatParams(), rng, registry)
        assert [c.innovation for c in a.connections] == [c.innovation for c in b.connections]


class TestMutation:
    """Structural and parametric mutation."""

    def test_forced_add_node_on_single_connection(self):
        registry = InnovationRegistry(next_innovation=1, next_node_id=5)
        genome = CppnGenome(0, 3, 2, _neat_nodes(), (ConnectionGene(0, 0, 3, 0.7),))
        params = NeatParams(**{**ZERO_RATES, "add_node_rate": 1.0})

        child = mutate(genome, params, np.random.default_rng(0), registry)

        assert len(child.hidden_ids) == 1
        assert len(child.connections) == 3
        assert not child.connection_map[0].enabled
        hidden = child.hidden_ids[0]
        into = [c for c in child.connections if c.target == hidden]
        out_of = [c for c in child.connections if c.source == hidden]
        assert into[0].weight == 1.0 and out_of[0].weight == 0.7

    def test_all_rates_zero_is_identity(self):
        genome = _random_genome(3)
        params = NeatParams(**ZERO_RATES)
        child = mutate(genome, params, np.random.default_rng(1), InnovationRegistry(10**6, 10**6))
        assert child == genome

    def test_add_connection_attempt_rate(self, mocker):
        spy = mocker.spy(operators, "mutate_add_connection")
        rng = np.random.default_rng(42)
        registry = InnovationRegistry()
        params = NeatParams()
        genome = initial_genome(0, GenomeMode.NEAT, params, rng, registry)
        for _ in range(1000):
            mutate(genome, params, rng, registry)
        assert 250 <= spy.call_count <= 350

    def test_same_split_reuses_innovations_within_generation(self):
        registry = InnovationRegistry(next_innovation=1, next_node_id=5)
        genome = CppnGenome(0, 3, 2, _neat_nodes(), (ConnectionGene(0, 0, 3, 0.7),))
        params = NeatParams(**{**ZERO_RATES, "add_node_rate": 1.0})
        a = mutate(genome, params, np.random.default_rng(1), registry)
        b = mutate(genome, params, np.random.default_rng(2), registry)
        assert [c.innovation for c in a.connections] == [c.innovation for c in b.connections]
        assert a.hidden_ids == b.hidden_ids

        registry.new_generation()
        c = mutate(genome, params, np.random.default_rng(3), registry)
        assert c.hidden_ids != a.hidden_ids

    def test_same_connection_reuses_innovation(self):
        registry = InnovationRegistry()
        assert registry.connection(0, 5) == registry.connection(0, 5)
        assert registry.connection(0, 5) != registry.connection(1, 5)

    def test_io_counts_fixed(self):
        genome = _random_genome(11, steps=200)
        kinds = [n.kind for n in genome.nodes]
        assert kinds.count(NodeKind.INPUT) == 3
        assert kinds.count(NodeKind.OUTPUT) == 2

    def test_feed_forward_after_many_mutations(self):
        rng = np.random.default_rng(5)
        registry = InnovationRegistry()
        params = NeatParams(toggle_connection_rate=0.9)
        genome = initial_genome(0, GenomeMode.NEAT, params, rng, registry)
        for _ in range(1000):
            genome = mutate(genome, params, rng, registry)
            validate_genome(genome)

    @pytest.mark.slow
    def test_feed_forward_after_1e5_mutations(self):
        rng = np.random.default_rng(6)
        registry = InnovationRegistry()
        params = NeatParams(delete_node_rate=0.3, delete_connection_rate=0.3)
        population = [
            initial_genome(i, GenomeMode.NEAT, params, rng, registry) for i in range(50)
        ]
        for step in range(100_000):
            i = step % len(population)
            population[i] = mutate(population[i], params, rng, registry)
            validate_genome(population[i])
            if i == 0:
                registry.new_generation()


class TestCrossover:
    """NEAT crossover."""

    def test_self_crossover_is_identity(self):
        genome = _random_genome(2)
        child = crossover(genome, genome, np.random.default_rng(0))
        assert child.structurally_equal(genome)

    def test_disjoint_parents_follow_fitter(self):
        fitter = CppnGenome(0, 3, 2, _neat_nodes(), (ConnectionGene(0, 0, 3, 0.5),))
        other = CppnGenome(1, 3, 2, _neat_nodes(), (ConnectionGene(1, 1, 4, -0.5),))
        child = crossover(fitter, other, np.random.default_rng(0))
        assert child.connections == fitter.connections
        assert [n.id for n in child.nodes] == [n.id for n in fitter.nodes]

    def test_mode_mismatch(self):
        a = _random_genome(0)
        b = _random_genome(0, mode=GenomeMode.HYPERNEAT)
        with pytest.raises(ContractViolationError):
            crossover(a, b, np.random.default_rng(0))

    def test_children_only_carry_parent_genes(self):
        rng = np.random.default_rng(9)
        for seed in range(100):
            a = _random_genome(seed, steps=15)
            b = _random_genome(seed + 1000, steps=15)
            child = crossover(a, b, rng)
            parent_innovations = {c.innovation for c in a.connections} | {
                c.innovation for c in b.connections
            }
            assert {c.innovation for c in child.connections} <= parent_innovations
            validate_genome(child)


class TestDistance:
    """Compatibility distance."""

    def test_zero_for_identical(self):
        genome = _random_genome(4)
        assert distance(genome, genome, NeatParams()) == 0.0

    def test_single_weight_difference(self):
        a = CppnGenome(0, 3, 2, _neat_nodes(), (ConnectionGene(0, 0, 3, 1.0),))
        b = CppnGenome(1, 3, 2, _neat_nodes(), (ConnectionGene(0, 0, 3, 3.0),))
        assert distance(a, b, NeatParams()) == pytest.approx(1.0)

    def test_symmetric_non_negative_and_matches_oracle(self):
        params = NeatParams()
        rng = np.random.default_rng(12)
        registry = InnovationRegistry()
        pool = [initial_genome(i, GenomeMode.NEAT, params, rng, registry) for i in range(40)]
        for _ in range(25):
            pool = [mutate(g, params, rng, registry) for g in pool]
        for _ in range(1000):
            i, j = rng.integers(len(pool), size=2)
            d_ab = distance(pool[i], pool[j], params)
            d_ba = distance(pool[j], pool[i], params)
            assert d_ab >= 0.0
            assert d_ab == pytest.approx(d_ba, abs=1e-12)
            assert d_ab == pytest.approx(_naive_distance(pool[i], pool[j], params), abs=1e-12)


class TestGenomeDocument:
    """Canonical JSON documents."""

    def test_round_trip(self):
        genome = _random_genome(8)
        assert CppnGenome.from_document(genome.to_document()) == genome

    def test_document_order(self):
        doc = _random_genome(8).to_document()
        ids = [n["id"] for n in doc["nodes"]]
        innovations = [c["innovation"] for c in doc["connections"]]
        assert ids == sorted(ids)
        assert innovations == sorted(innovations)

    def test_rejects_cyclic_document(self):
        doc = CppnGenome(0, 3, 2, _neat_nodes(), (ConnectionGene(0, 0, 3, 1.0),)).to_document()
        doc["nodes"].append({"id": 5, "kind": "hidden", "activation": "sine", "bias": 0.0})
        doc["connections"] += [
            {"innovation": 1, "source": 3, "target": 5, "weight": 1.0, "enabled": True},
            {"innovation": 2, "source": 5, "target": 3, "weight": 1.0, "enabled": True},
        ]
        with pytest.raises(MalformedGenomeError):
            CppnGenome.from_document(doc)
