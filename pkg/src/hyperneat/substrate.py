"""Layered HyperNEAT substrate.

Neuron ``j`` of layer ``k`` sits at ``(u, v) = (normalize_coord(k, L),
normalize_coord(j, size_k))``. The CPPN is queried with ``(u1, v1, u2, v2, 1)`` for every
source/target pair of adjacent layers and its output is painted into a dense weight
matrix. The painted network maps a lattice coordinate to ``(pv, m)``.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from src.core.exceptions import ContractViolationError
from src.core.logging import get_logger
from src.genome.genome import CppnGenome, activate_batch
from src.models.config import GenomeMode, PaintingConfig, SubstrateLayout
from src.morphology.voxels import normalize_coord

logger = get_logger(__name__)


@dataclass(frozen=True, eq=False)
class PhenotypeNetwork:
    """Painted substrate; ``weights[k]`` has shape ``(size[k + 1], size[k])``."""

    layout: SubstrateLayout
    weights: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        sizes = self.layout.layer_sizes
        if len(self.weights) != len(sizes) - 1:
            raise ContractViolationError("one weight matrix per adjacent layer pair is required")
        for k, w in enumerate(self.weights):
            if w.shape != (sizes[k + 1], sizes[k]):
                raise ContractViolationError(
                    f"weights[{k}] has shape {w.shape}, expected {(sizes[k + 1], sizes[k])}"
                )
            w.setflags(write=False)

    def to_document(self) -> dict:
        return {
            "layer_sizes": list(self.layout.layer_sizes),
            "activation": self.layout.activation.value,
            "weights": [w.tolist() for w in self.weights],
        }


def neuron_coordinates(layout: SubstrateLayout) -> List[np.ndarray]:
    """Per layer, an array of shape (size, 2) holding each neuron's (u, v)."""
    n_layers = len(layout.layer_sizes)
    coords = []
    for k, size in enumerate(layout.layer_sizes):
        u = normalize_coord(k, n_layers)
        coords.append(np.array([[u, normalize_coord(j, size)] for j in range(size)]))
    return coords


def scale_weight(raw: np.ndarray, cfg: PaintingConfig) -> np.ndarray:
    """Threshold and rescale raw CPPN outputs into substrate weights."""
    raw = np.asarray(raw, dtype=np.float64)
    t, r = cfg.weight_threshold, cfg.weight_range
    magnitude = (np.abs(raw) - t) / (1.0 - t) * r
    painted = np.sign(raw) * np.minimum(magnitude, r)
    return np.where(np.abs(raw) <= t, 0.0, painted)


def paint(cppn: CppnGenome, layout: SubstrateLayout, cfg: PaintingConfig) -> PhenotypeNetwork:
    """Express the substrate weights encoded by a HyperNEAT-mode CPPN."""
    if cppn.mode is not GenomeMode.HYPERNEAT:
        raise ContractViolationError(
            f"painting needs a {GenomeMode.HYPERNEAT.input_count}-input, "
            f"{GenomeMode.HYPERNEAT.output_count}-output CPPN; genome {cppn.key} has "
            f"{cppn.input_count} inputs and {cppn.output_count} outputs"
        )
    coords = neuron_coordinates(layout)
    weights = []
    for source, target in zip(coords[:-1], coords[1:]):
        n_t, n_s = len(target), len(source)
        tgt = np.repeat(target, n_s, axis=0)
        src = np.tile(source, (n_t, 1))
        inputs = np.column_stack([src, tgt, np.ones(n_t * n_s)])
        raw = activate_batch(cppn, inputs)[:, 0].reshape(n_t, n_s)
        weights.append(scale_weight(raw, cfg))
    return PhenotypeNetwork(layout, tuple(weights))


def query_substrate_batch(net: PhenotypeNetwork, points: np.ndarray) -> np.ndarray:
    """Forward pass for many points: ``(n, 3) -> (n, 2)`` columns (pv, m)."""
    h = np.asarray(points, dtype=np.float64)
    activation = net.layout.activation
    for w in net.weights:
        h = activation(h @ w.T)
    return h


def query_substrate(net: PhenotypeNetwork, x: float, y: float, z: float) -> Tuple[float, float]:
    out = query_substrate_batch(net, np.array([[x, y, z]], dtype=np.float64))[0]
    return float(out[0]), float(out[1])
