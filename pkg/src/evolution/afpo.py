"""Age-fitness Pareto optimization over NEAT genomes.

Selection keeps the non-dominated set on (maximize fitness, minimize age). Ages grow by
one per generation, offspring inherit their parent's age, and each generation injects
fresh random genomes at age 0 to keep new lineages arriving.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.exceptions import ContractViolationError
from src.evolution.base import EvolutionRun, GenomeBatchEvaluator
from src.evolution.record import EvolutionRecord
from src.genome.genome import CppnGenome
from src.genome.operators import mutate
from src.models.config import Algorithm, RunConfig


@dataclass
class AfpoIndividual:
    genome: CppnGenome
    age: int
    fitness: Optional[float] = None


def pareto_front(points: Sequence[Tuple[float, int]]) -> List[int]:
    """Indices of the (fitness, age) points no other point dominates.

    ``a`` dominates ``b`` when it is no worse in both objectives (higher fitness, lower
    age) and strictly better in one. Identical points do not dominate each other.
    """
    if not points:
        return []
    fitness = np.array([p[0] for p in points], dtype=np.float64)
    age = np.array([p[1] for p in points], dtype=np.int64)
    no_worse = (fitness[:, None] >= fitness[None, :]) & (age[:, None] <= age[None, :])
    better = (fitness[:, None] > fitness[None, :]) | (age[:, None] < age[None, :])
    dominated = (no_worse & better).any(axis=0)
    return [int(i) for i in np.flatnonzero(~dominated)]


def _selection_key(individual: AfpoIndividual) -> Tuple[float, int, int]:
    return (-individual.fitness, individual.age, individual.genome.key)


class AfpoRun(EvolutionRun):
    algorithm = Algorithm.AFPO.value

    def __init__(self, config: RunConfig, evaluator: GenomeBatchEvaluator, rng=None, **kwargs):
        if config.algorithm is not Algorithm.AFPO:
            raise ContractViolationError(f"AFPO run cannot drive algorithm {config.algorithm.value}")
        super().__init__(config, evaluator, rng, **kwargs)
        self.newcomers = config.afpo.newcomers
        if self.newcomers >= self.params.population_size:
            raise ContractViolationError("afpo.newcomers must be smaller than the population size")
        self.population: List[AfpoIndividual] = []
        self.front: List[int] = []

    def _evaluate(self) -> None:
        # survivors keep their fitness; evaluation is deterministic
        pending = [ind for ind in self.population if ind.fitness is None]
        for ind, value in zip(pending, self.score([ind.genome for ind in pending])):
            ind.fitness = value
        self.front = pareto_front([(ind.fitness, ind.age) for ind in self.population])
        self.observe(
            [ind.genome for ind in self.population],
            [ind.fitness for ind in self.population],
            len(self.front),
        )

    def start(self) -> None:
        self.population = [AfpoIndividual(self.fresh_genome(), 0) for _ in range(self.params.population_size)]
        self._evaluate()

    def step(self) -> None:
        size = self.params.population_size
        for ind in self.population:
            ind.age += 1
        front = [self.population[i] for i in pareto_front([(ind.fitness, ind.age) for ind in self.population])]
        survivors = sorted(front, key=_selection_key)[: size - self.newcomers]

        offspring: List[AfpoIndividual] = []
        while len(survivors) + len(offspring) < size - self.newcomers:
            parent = survivors[int(self.rng.integers(len(survivors)))]
            child = mutate(parent.genome, self.params, self.rng, self.registry, key=self.keys())
            offspring.append(AfpoIndividual(child, parent.age))
        newcomers = [AfpoIndividual(self.fresh_genome(), 0) for _ in range(self.newcomers)]
        self.population = survivors + offspring + newcomers
        self._evaluate()

    def snapshot(self) -> Dict[str, Any]:
        return {
            "population": [ind.genome.to_document() for ind in self.population],
            "fitness": [ind.fitness for ind in self.population],
            "ages": [ind.age for ind in self.population],
            "front": self.front,
        }


def evolve_afpo(
    config: RunConfig,
    evaluator: GenomeBatchEvaluator,
    rng: Optional[np.random.Generator] = None,
    *,
    checkpoint_dir: Optional[Union[str, Path]] = None,
) -> Tuple[CppnGenome, EvolutionRecord]:
    """Run AFPO and return the best genome found and the per-generation record."""
    return AfpoRun(config, evaluator, rng, checkpoint_dir=checkpoint_dir).run()

