"""NEAT genetic operators: mutation, crossover and compatibility distance.

Each structural operator is applied independently with its configured rate; an
operator that has nothing to act on (e.g. delete-node without hidden nodes) is skipped.
Operators never introduce a cycle among enabled connections.
"""

from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Set

import numpy as np

from src.core.exceptions import ContractViolationError
from src.core.logging import get_logger
from src.genome.genome import ConnectionGene, CppnGenome, NodeGene, NodeKind
from src.genome.innovation import InnovationRegistry
from src.models.config import NeatParams

logger = get_logger(__name__)

# Genomes smaller than this are not normalized by their gene count.
SMALL_GENOME_GENES = 20


@dataclass
class _Draft:
    """Mutable working copy of a genome."""

    input_count: int
    output_count: int
    nodes: Dict[int, NodeGene]
    connections: Dict[int, ConnectionGene]

    @classmethod
    def of(cls, genome: CppnGenome) -> "_Draft":
        return cls(
            genome.input_count,
            genome.output_count,
            dict(genome.node_map),
            dict(genome.connection_map),
        )

    def freeze(self, key: int) -> CppnGenome:
        return CppnGenome(
            key,
            self.input_count,
            self.output_count,
            tuple(self.nodes.values()),
            tuple(self.connections.values()),
        )

    def has_pair(self, source: int, target: int) -> bool:
        return any(c.source == source and c.target == target for c in self.connections.values())


def creates_cycle(connections: Dict[int, ConnectionGene], source: int, target: int) -> bool:
    """Would enabling ``source -> target`` close a cycle among enabled connections?"""
    if source == target:
        return True
    adjacency: Dict[int, List[int]] = {}
    for conn in connections.values():
        if conn.enabled:
            adjacency.setdefault(conn.source, []).append(conn.target)
    stack, seen = [target], {target}
    while stack:
        node = stack.pop()
        if node == source:
            return True
        for nxt in adjacency.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


def _choice(rng: np.random.Generator, items: List):
    return items[int(rng.integers(len(items)))]


def _roll(rng: np.random.Generator, rate: float) -> bool:
    return bool(rng.random() < rate)


def mutate_add_node(
    draft: _Draft, params: NeatParams, rng: np.random.Generator, registry: InnovationRegistry
) -> bool:
    """Split an enabled connection: a -> b becomes a -> new -> b, the original disabled."""
    enabled = sorted(i for i, c in draft.connections.items() if c.enabled)
    if not enabled:
        return False
    old = draft.connections[_choice(rng, enabled)]
    node_id = registry.split(old.innovation)
    if node_id in draft.nodes:
        node_id = registry.fresh_node_id()
    draft.nodes[node_id] = NodeGene(
        node_id, NodeKind.HIDDEN, _choice(rng, list(params.activation_options)), 0.0
    )
    draft.connections[old.innovation] = replace(old, enabled=False)
    first = registry.connection(old.source, node_id)
    second = registry.connection(node_id, old.target)
    draft.connections[first] = ConnectionGene(first, old.source, node_id, 1.0)
    draft.connections[second] = ConnectionGene(second, node_id, old.target, old.weight)
    return True


def mutate_delete_node(
    draft: _Draft, params: NeatParams, rng: np.random.Generator, registry: InnovationRegistry
) -> bool:
    hidden = sorted(i for i, n in draft.nodes.items() if n.kind is NodeKind.HIDDEN)
    if not hidden:
        return False
    victim = _choice(rng, hidden)
    del draft.nodes[victim]
    for innovation in [i for i, c in draft.connections.items() if victim in (c.source, c.target)]:
        del draft.connections[innovation]
    return True


def mutate_add_connection(
    draft: _Draft, params: NeatParams, rng: np.random.Generator, registry: InnovationRegistry
) -> bool:
    sources = sorted(i for i, n in draft.nodes.items() if n.kind is not NodeKind.OUTPUT)
    targets = sorted(i for i, n in draft.nodes.items() if n.kind is not NodeKind.INPUT)
    for _ in range(params.add_connection_attempts):
        source, target = _choice(rng, sources), _choice(rng, targets)
        if source == target or draft.has_pair(source, target):
            continue
        if creates_cycle(draft.connections, source, target):
            continue
        innovation = registry.connection(source, target)
        if innovation in draft.connections:
            continue
        r = params.initial_weight_range
        draft.connections[innovation] = ConnectionGene(
            innovation, source, target, float(rng.uniform(-r, r))
        )
        return True
    return False


def mutate_delete_connection(
    draft: _Draft, params: NeatParams, rng: np.random.Generator, registry: InnovationRegistry
) -> bool:
    if not draft.connections:
        return False
    del draft.connections[_choice(rng, sorted(draft.connections))]
    return True


def mutate_toggle_connection(
    draft: _Draft, params: NeatParams, rng: np.random.Generator, registry: InnovationRegistry
) -> bool:
    if not draft.connections:
        return False
    conn = draft.connections[_choice(rng, sorted(draft.connections))]
    if conn.enabled:
        draft.connections[conn.innovation] = replace(conn, enabled=False)
        return True
    if creates_cycle(draft.connections, conn.source, conn.target):
        return False
    draft.connections[conn.innovation] = replace(conn, enabled=True)
    return True


def _mutate_attributes(draft: _Draft, params: NeatParams, rng: np.random.Generator) -> None:
    options = list(params.activation_options)
    for node_id in sorted(draft.nodes):
        node = draft.nodes[node_id]
        if node.kind is NodeKind.INPUT:
            continue
        if _roll(rng, params.activation_mutate_rate):
            node = replace(node, activation=_choice(rng, options))
        if _roll(rng, params.bias_mutate_rate):
            node = replace(node, bias=node.bias + float(rng.normal(0.0, params.weight_perturb_sigma)))
        draft.nodes[node_id] = node
    for innovation in sorted(draft.connections):
        conn = draft.connections[innovation]
        if not _roll(rng, params.weight_mutate_rate):
            continue
        if _roll(rng, params.weight_replace_rate):
            r = params.weight_replace_range
            weight = float(rng.uniform(-r, r))
        else:
            weight = conn.weight + float(rng.normal(0.0, params.weight_perturb_sigma))
        draft.connections[innovation] = replace(conn, weight=weight)


def mutate(
    genome: CppnGenome,
    params: NeatParams,
    rng: np.random.Generator,
    registry: InnovationRegistry,
    *,
    key: Optional[int] = None,
) -> CppnGenome:
    """Return a mutated copy of ``genome`` (keeps its key unless ``key`` is given)."""
    draft = _Draft.of(genome)
    if _roll(rng, params.add_node_rate):
        mutate_add_node(draft, params, rng, registry)
    if _roll(rng, params.delete_node_rate):
        mutate_delete_node(draft, params, rng, registry)
    if _roll(rng, params.add_connection_rate):
        mutate_add_connection(draft, params, rng, registry)
    if _roll(rng, params.delete_connection_rate):
        mutate_delete_connection(draft, params, rng, registry)
    if _roll(rng, params.toggle_connection_rate):
        mutate_toggle_connection(draft, params, rng, registry)
    _mutate_attributes(draft, params, rng)
    return draft.freeze(genome.key if key is None else key)


def _check_same_mode(a: CppnGenome, b: CppnGenome) -> None:
    if (a.input_count, a.output_count) != (b.input_count, b.output_count):
        raise ContractViolationError(
            f"genomes {a.key} and {b.key} have different input/output counts"
        )


def _disable_cycles(connections: Dict[int, ConnectionGene]) -> None:
    """Re-insert enabled genes in innovation order, disabling any that closes a cycle."""
    accepted: Dict[int, ConnectionGene] = {}
    for innovation in sorted(connections):
        conn = connections[innovation]
        if conn.enabled and creates_cycle(accepted, conn.source, conn.target):
            conn = replace(conn, enabled=False)
        accepted[innovation] = conn
    connections.clear()
    connections.update(accepted)


def crossover(
    fitter: CppnGenome, other: CppnGenome, rng: np.random.Generator, *, key: Optional[int] = None
) -> CppnGenome:
    """Matching genes from either parent at random; disjoint and excess from ``fitter``."""
    _check_same_mode(fitter, other)
    other_nodes, other_conns = other.node_map, other.connection_map

    nodes: Dict[int, NodeGene] = {}
    for node in fitter.nodes:
        match = other_nodes.get(node.id)
        nodes[node.id] = match if match is not None and match.kind is node.kind and _roll(rng, 0.5) else node

    connections: Dict[int, ConnectionGene] = {}
    for conn in fitter.connections:
        match = other_conns.get(conn.innovation)
        chosen = conn
        if match is not None and (match.source, match.target) == (conn.source, conn.target):
            chosen = match if _roll(rng, 0.5) else conn
        connections[conn.innovation] = chosen
    _disable_cycles(connections)

    draft = _Draft(fitter.input_count, fitter.output_count, nodes, connections)
    return draft.freeze(fitter.key if key is None else key)


def distance(a: CppnGenome, b: CppnGenome, params: NeatParams) -> float:
    """Compatibility distance.

    ``disjoint_coefficient * (D + E) / N + weight_coefficient * W`` where D + E counts
    non-matching connection genes, N is the larger connection count (1 below 20 genes)
    and W is the mean absolute weight difference of matching connections plus one per
    matching node whose activation function differs.
    """
    _check_same_mode(a, b)
    conns_a, conns_b = a.connection_map, b.connection_map
    keys_a: Set[int] = set(conns_a)
    keys_b: Set[int] = set(conns_b)
    matching = sorted(keys_a & keys_b)
    non_matching = len(keys_a ^ keys_b)

    n = max(len(keys_a), len(keys_b))
    if n < SMALL_GENOME_GENES:
        n = 1

    weight_term = 0.0
    if matching:
        weight_term = sum(abs(conns_a[i].weight - conns_b[i].weight) for i in matching) / len(matching)
    nodes_a, nodes_b = a.node_map, b.node_map
    weight_term += sum(
        1 for i in sorted(nodes_a.keys() & nodes_b.keys())
        if nodes_a[i].activation != nodes_b[i].activation
    )
    return params.disjoint_coefficient * non_matching / n + params.weight_coefficient * weight_term
