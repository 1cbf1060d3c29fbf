"""Shared run loop for the evolutionary algorithms."""

import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.exceptions import EvaluationAbortedError
from src.core.logging import get_logger
from src.core.seeding import Stream, derive_generator, generator_state
from src.evolution.record import EvolutionRecord, write_checkpoint
from src.evolution.species import KeySequence
from src.genome.genome import CppnGenome, initial_genome
from src.genome.innovation import InnovationRegistry
from src.models.config import RunConfig

logger = get_logger(__name__)

GenomeBatchEvaluator = Callable[[Sequence[CppnGenome]], List[float]]


def pointwise(fn: Callable[[CppnGenome], float]) -> GenomeBatchEvaluator:
    """Lift a one-genome fitness function to the batch interface."""

    def evaluate(genomes: Sequence[CppnGenome]) -> List[float]:
        return [float(fn(g)) for g in genomes]

    return evaluate


class EvolutionRun:
    """One seeded run; subclasses supply ``step`` and the state they checkpoint."""

    algorithm = ""

    def __init__(
        self,
        config: RunConfig,
        evaluator: GenomeBatchEvaluator,
        rng: Optional[np.random.Generator] = None,
        *,
        checkpoint_dir: Optional[Union[str, Path]] = None,
    ):
        self.config = config
        self.params = config.neat
        self.evaluator = evaluator
        self.rng = rng if rng is not None else derive_generator(config.seed, Stream.EVOLUTION)
        self.population_rng = derive_generator(config.seed, Stream.POPULATION)
        self.registry = InnovationRegistry()
        self.mode = config.algorithm.genome_mode
        self.keys = KeySequence()
        self.record = EvolutionRecord(algorithm=self.algorithm)
        self.checkpoint_dir = Path(checkpoint_dir) if checkpoint_dir is not None else None
        self.generation = 0
        self.best: Optional[Tuple[CppnGenome, float]] = None

    def fresh_genome(self) -> CppnGenome:
        return initial_genome(self.keys(), self.mode, self.params, self.population_rng, self.registry)

    def score(self, genomes: Sequence[CppnGenome]) -> List[float]:
        """Evaluate ``genomes``; a non-finite fitness counts as 0."""
        if not genomes:
            return []
        try:
            values = self.evaluator(genomes)
        except EvaluationAbortedError as exc:
            path = self.checkpoint() if self.checkpoint_dir is not None else None
            logger.error("run aborted", generation=self.generation, checkpoint=str(path) if path else None)
            raise EvaluationAbortedError(str(exc), checkpoint=str(path) if path else None) from exc
        if len(values) != len(genomes):
            raise EvaluationAbortedError(f"evaluator returned {len(values)} values for {len(genomes)} genomes")
        return [float(v) if math.isfinite(v) else 0.0 for v in values]

    def observe(self, genomes: Sequence[CppnGenome], fitness: Sequence[float], group_count: int) -> None:
        """Append this generation's row and update the best-so-far genome."""
        champion = min(zip(genomes, fitness), key=lambda item: (-item[1], item[0].key))
        if self.best is None or champion[1] > self.best[1]:
            self.best = champion
        stats = self.record.append(self.generation, list(fitness), group_count, champion[0], champion[1])
        logger.info(
            "generation complete",
            algorithm=self.algorithm,
            generation=stats.generation,
            best_fitness=stats.best_fitness,
            mean_fitness=stats.mean_fitness,
            groups=group_count,
        )
        if self.checkpoint_dir is not None and self.generation % self.config.checkpoint_interval == 0:
            self.checkpoint()

    def checkpoint(self) -> Path:
        state = {
            "algorithm": self.algorithm,
            "seed": self.config.seed,
            "rng": generator_state(self.rng),
            "population_rng": generator_state(self.population_rng),
            "registry": self.registry.state(),
            "next_key": self.keys.next_key,
            "record": self.record.to_document(),
            **self.snapshot(),
        }
        return write_checkpoint(self.checkpoint_dir, self.generation, state)

    def snapshot(self) -> Dict[str, Any]:
        """Population-specific checkpoint fields: ``population`` and ``fitness`` at least."""
        raise NotImplementedError

    def start(self) -> None:
        raise NotImplementedError

    def step(self) -> None:
        """Advance from the evaluated generation ``self.generation`` to the next one."""
        raise NotImplementedError

    def run(self) -> Tuple[CppnGenome, EvolutionRecord]:
        generations = self.params.generations
        logger.info(
            "run starting",
            algorithm=self.algorithm,
            seed=self.config.seed,
            population=self.params.population_size,
            generations=generations,
        )
        self.start()
        while self.generation < generations:
            self.registry.new_generation()
            self.generation += 1
            self.step()
        assert self.best is not None
        return self.best[0], self.record
