"""Genome -> morphology decoders for the direct (NEAT/AFPO) and HyperNEAT encodings."""

import numpy as np

from src.core.exceptions import ContractViolationError
from src.genome.genome import CppnGenome, activate_batch
from src.hyperneat.substrate import paint, query_substrate_batch
from src.models.config import GenomeMode, LatticeDims, PaintingConfig, RunConfig, SubstrateLayout
from src.morphology.voxels import Morphology, decode


def decode_cppn(genome: CppnGenome, dims: LatticeDims) -> Morphology:
    """Query a 3-in/2-out CPPN directly at every lattice point."""
    if genome.mode is not GenomeMode.NEAT:
        raise ContractViolationError(f"genome {genome.key} is not a direct-encoding CPPN")
    return decode(lambda points: activate_batch(genome, points), dims, f"cppn:{genome.key}")


def decode_substrate(
    genome: CppnGenome, layout: SubstrateLayout, painting: PaintingConfig, dims: LatticeDims
) -> Morphology:
    """Paint the substrate from ``genome`` and query it at every lattice point."""
    net = paint(genome, layout, painting)
    return decode(
        lambda points: query_substrate_batch(net, np.asarray(points)),
        dims,
        f"substrate:{genome.key}",
    )


def decode_genome(genome: CppnGenome, config: RunConfig) -> Morphology:
    if config.algorithm.genome_mode is GenomeMode.HYPERNEAT:
        return decode_substrate(genome, config.substrate, config.painting, config.lattice)
    return decode_cppn(genome, config.lattice)
