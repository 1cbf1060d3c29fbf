"""NEAT and HyperNEAT: speciated evolution of CPPN genomes."""

from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from src.core.exceptions import ContractViolationError
from src.evolution.afpo import evolve_afpo
from src.evolution.base import EvolutionRun, GenomeBatchEvaluator
from src.evolution.record import EvolutionRecord
from src.evolution.species import Species, reproduce, speciate
from src.genome.genome import CppnGenome
from src.models.config import Algorithm, RunConfig


class NeatRun(EvolutionRun):
    algorithm = "neat"

    def __init__(self, config: RunConfig, evaluator: GenomeBatchEvaluator, rng=None, **kwargs):
        if config.algorithm not in (Algorithm.NEAT, Algorithm.HYPERNEAT):
            raise ContractViolationError(f"NEAT run cannot drive algorithm {config.algorithm.value}")
        super().__init__(config, evaluator, rng, **kwargs)
        self.algorithm = config.algorithm.value
        self.record.algorithm = self.algorithm
        self.population: List[CppnGenome] = []
        self.fitness: List[float] = []
        self.species: List[Species] = []
        self.next_species_id = 0

    def _evaluate_and_speciate(self) -> None:
        self.fitness = []  # no stale scores in an abort checkpoint
        self.fitness = self.score(self.population)
        self.species, self.next_species_id = speciate(
            list(zip(self.population, self.fitness)),
            self.species,
            self.params,
            next_species_id=self.next_species_id,
        )
        self.observe(self.population, self.fitness, len(self.species))

    def start(self) -> None:
        self.population = [self.fresh_genome() for _ in range(self.params.population_size)]
        self._evaluate_and_speciate()

    def step(self) -> None:
        self.population = reproduce(self.species, self.params, self.rng, self.registry, self.keys)
        self._evaluate_and_speciate()

    def snapshot(self) -> Dict[str, Any]:
        return {
            "population": [g.to_document() for g in self.population],
            "fitness": self.fitness or [None] * len(self.population),
            "species": [s.summary() for s in self.species],
            "next_species_id": self.next_species_id,
        }


def evolve_neat(
    config: RunConfig,
    evaluator: GenomeBatchEvaluator,
    rng: Optional[np.random.Generator] = None,
    *,
    checkpoint_dir: Optional[Union[str, Path]] = None,
) -> Tuple[CppnGenome, EvolutionRecord]:
    """Run NEAT (or HyperNEAT, per ``config.algorithm``) and return the best genome and record.

    Generation 0 is the evaluated initial population; ``config.neat.generations`` further
    generations follow. With ``generations == 0`` the best initial genome is returned.
    """
    return NeatRun(config, evaluator, rng, checkpoint_dir=checkpoint_dir).run()


def evolve(
    config: RunConfig,
    evaluator: GenomeBatchEvaluator,
    rng: Optional[np.random.Generator] = None,
    *,
    checkpoint_dir: Optional[Union[str, Path]] = None,
) -> Tuple[CppnGenome, EvolutionRecord]:
    """Run whichever algorithm ``config.algorithm`` names."""
    runner = evolve_afpo if config.algorithm is Algorithm.AFPO else evolve_neat
    return runner(config, evaluator, rng, checkpoint_dir=checkpoint_dir)
