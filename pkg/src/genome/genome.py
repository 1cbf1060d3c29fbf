"""CPPN genome representation and feed-forward activation."""

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from graphlib import CycleError, TopologicalSorter
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import ContractViolationError, MalformedGenomeError
from src.genome.activations import ActivationFunction
from src.genome.innovation import InnovationRegistry
from src.models.config import GenomeMode, NeatParams

# Pre-activation sums are clipped here so chains of squaring nodes stay finite.
PREACTIVATION_LIMIT = 1e100


class NodeKind(str, Enum):
    INPUT = "input"
    HIDDEN = "hidden"
    OUTPUT = "output"


@dataclass(frozen=True)
class NodeGene:
    id: int
    kind: NodeKind
    activation: Optional[ActivationFunction] = None  # ignored on inputs
    bias: float = 0.0


@dataclass(frozen=True)
class ConnectionGene:
    innovation: int
    source: int
    target: int
    weight: float
    enabled: bool = True


@dataclass(frozen=True)
class CppnGenome:
    """Immutable CPPN genome; operators return new instances.

    ``nodes`` are kept sorted by id and ``connections`` by innovation number.
    """

    key: int
    input_count: int
    output_count: int
    nodes: Tuple[NodeGene, ...]
    connections: Tuple[ConnectionGene, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.id)))
        object.__setattr__(
            self, "connections", tuple(sorted(self.connections, key=lambda c: c.innovation))
        )

    @property
    def input_ids(self) -> List[int]:
        return list(range(self.input_count))

    @property
    def output_ids(self) -> List[int]:
        return list(range(self.input_count, self.input_count + self.output_count))

    @cached_property
    def node_map(self) -> Dict[int, NodeGene]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def connection_map(self) -> Dict[int, ConnectionGene]:
        return {c.innovation: c for c in self.connections}

    @property
    def hidden_ids(self) -> List[int]:
        return [n.id for n in self.nodes if n.kind is NodeKind.HIDDEN]

    @property
    def enabled_connections(self) -> List[ConnectionGene]:
        return [c for c in self.connections if c.enabled]

    @cached_property
    def evaluation_order(self) -> Tuple[int, ...]:
        """Non-input node ids in a topological order of the enabled graph."""
        node_map = self.node_map
        sorter: TopologicalSorter = TopologicalSorter()
        for node in self.nodes:
            if node.kind is not NodeKind.INPUT:
                sorter.add(node.id)
        for conn in self.enabled_connections:
            if conn.source not in node_map or conn.target not in node_map:
                raise MalformedGenomeError(
                    f"genome {self.key}: connection {conn.innovation} references a missing node"
                )
            if node_map[conn.target].kind is NodeKind.INPUT:
                raise MalformedGenomeError(
                    f"genome {self.key}: connection {conn.innovation} targets an input node"
                )
            sorter.add(conn.target, conn.source)
        try:
            order = tuple(sorter.static_order())
        except CycleError as exc:
            raise MalformedGenomeError(f"genome {self.key}: enabled connections form a cycle") from exc
        return tuple(i for i in order if node_map[i].kind is not NodeKind.INPUT)

    @property
    def mode(self) -> Optional[GenomeMode]:
        for mode in GenomeMode:
            if (mode.input_count, mode.output_count) == (self.input_count, self.output_count):
                return mode
        return None

    def size(self) -> Tuple[int, int]:
        """(node count, enabled connection count)."""
        return len(self.nodes), len(self.enabled_connections)

    def with_key(self, key: int) -> "CppnGenome":
        return CppnGenome(key, self.input_count, self.output_count, self.nodes, self.connections)

    def structurally_equal(self, other: "CppnGenome") -> bool:
        return (
            self.input_count == other.input_count
            and self.output_count == other.output_count
            and self.nodes == other.nodes
            and self.connections == other.connections
        )

    # Serialization

    def to_document(self) -> dict:
        """Canonical JSON document (nodes sorted by id, connections by innovation)."""
        return {
            "key": self.key,
            "input_count": self.input_count,
            "output_count": self.output_count,
            "nodes": [
                {
                    "id": n.id,
                    "kind": n.kind.value,
                    "activation": n.activation.value if n.activation else None,
                    "bias": n.bias,
                }
                for n in self.nodes
            ],
            "connections": [
                {
                    "innovation": c.innovation,
                    "source": c.source,
                    "target": c.target,
                    "weight": c.weight,
                    "enabled": c.enabled,
                }
                for c in self.connections
            ],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "CppnGenome":
        nodes = tuple(
            NodeGene(
                id=n["id"],
                kind=NodeKind(n["kind"]),
                activation=ActivationFunction(n["activation"]) if n["activation"] else None,
                bias=float(n["bias"]),
            )
            for n in doc["nodes"]
        )
        connections = tuple(
            ConnectionGene(
                innovation=c["innovation"],
                source=c["source"],
                target=c["target"],
                weight=float(c["weight"]),
                enabled=bool(c["enabled"]),
            )
            for c in doc["connections"]
        )
        genome = cls(doc["key"], doc["input_count"], doc["output_count"], nodes, connections)
        validate_genome(genome)
        return genome


def validate_genome(genome: CppnGenome) -> None:
    """Check the structural invariants; raises MalformedGenomeError."""
    ids = [n.id for n in genome.nodes]
    if len(set(ids)) != len(ids):
        raise MalformedGenomeError(f"genome {genome.key}: duplicate node ids")
    kinds = {n.id: n.kind for n in genome.nodes}
    for i in genome.input_ids:
        if kinds.get(i) is not NodeKind.INPUT:
            raise MalformedGenomeError(f"genome {genome.key}: input node {i} missing")
    for i in genome.output_ids:
        if kinds.get(i) is not NodeKind.OUTPUT:
            raise MalformedGenomeError(f"genome {genome.key}: output node {i} missing")
    if sum(k is NodeKind.INPUT for k in kinds.values()) != genome.input_count:
        raise MalformedGenomeError(f"genome {genome.key}: unexpected input nodes")
    if sum(k is NodeKind.OUTPUT for k in kinds.values()) != genome.output_count:
        raise MalformedGenomeError(f"genome {genome.key}: unexpected output nodes")
    for conn in genome.connections:
        if conn.source == conn.target:
            raise MalformedGenomeError(f"genome {genome.key}: self loop on {conn.source}")
    _ = genome.evaluation_order  # raises on cycles and dangling references


def activate_batch(genome: CppnGenome, inputs: np.ndarray) -> np.ndarray:
    """Evaluate the CPPN at many points at once: ``(n, input_count) -> (n, output_count)``."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != genome.input_count:
        raise ContractViolationError(
            f"expected inputs of shape (n, {genome.input_count}), got {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise ContractViolationError("CPPN inputs must be finite")

    incoming: Dict[int, List[ConnectionGene]] = {}
    for conn in genome.enabled_connections:
        incoming.setdefault(conn.target, []).append(conn)

    values: Dict[int, np.ndarray] = {i: x[:, i] for i in genome.input_ids}
    node_map = genome.node_map
    for node_id in genome.evaluation_order:
        node = node_map[node_id]
        total = np.full(x.shape[0], node.bias)
        for conn in incoming.get(node_id, ()):
            total = total + conn.weight * values[conn.source]
        total = np.clip(total, -PREACTIVATION_LIMIT, PREACTIVATION_LIMIT)
        values[node_id] = np.asarray(node.activation(total), dtype=np.float64)
    return np.stack([values[i] for i in genome.output_ids], axis=1)


def activate(genome: CppnGenome, inputs: Sequence[float]) -> List[float]:
    """Query the CPPN at one point."""
    if len(inputs) != genome.input_count:
        raise ContractViolationError(
            f"expected {genome.input_count} inputs, got {len(inputs)}"
        )
    out = activate_batch(genome, np.asarray([list(inputs)], dtype=np.float64))
    return [float(v) for v in out[0]]


def initial_genome(
    key: int,
    mode: GenomeMode,
    params: NeatParams,
    rng: np.random.Generator,
    registry: InnovationRegistry,
) -> CppnGenome:
    """Fully connected inputs -> outputs, uniform weights, no hidden nodes, zero biases."""
    n_in, n_out = mode.input_count, mode.output_count
    registry.reserve_node_ids(n_in + n_out)
    nodes = [NodeGene(i, NodeKind.INPUT) for i in range(n_in)]
    options = params.activation_options
    for o in range(n_in, n_in + n_out):
        activation = options[int(rng.integers(len(options)))]
        nodes.append(NodeGene(o, NodeKind.OUTPUT, activation, 0.0))
    r = params.initial_weight_range
    connections = [
        ConnectionGene(registry.connection(i, o), i, o, float(rng.uniform(-r, r)))
        for i in range(n_in)
        for o in range(n_in, n_in + n_out)
    ]
    return CppnGenome(key, n_in, n_out, tuple(nodes), tuple(connections))
