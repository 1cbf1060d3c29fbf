"""Genome -> morphology -> evaluation request; the fitness evaluator handed to evolution."""

from typing import List, Sequence, Union

from src.core.logging import get_logger
from src.core.seeding import Stream, derive_seed
from src.genome.genome import CppnGenome
from src.models.config import RunConfig, ServerPoolConfig
from src.models.evaluation import EvaluationRequest, RequestEvaluator, ScenarioSpec
from src.morphology.decoders import decode_genome
from src.morphology.voxels import voxel_count
from src.services.dispatcher import ServerPool
from src.services.local import LocalEvaluator
from src.simulator.engine import MIN_VOXELS

logger = get_logger(__name__)


def make_request_evaluator(evaluation: Union[str, ServerPoolConfig]) -> RequestEvaluator:
    if isinstance(evaluation, ServerPoolConfig):
        return ServerPool(evaluation)
    return LocalEvaluator()


class GenomeEvaluator:
    """Batch evaluator: fitness of each genome is its mean over the training scenarios.

    Morphologies with fewer than two voxels score 0 without being sent anywhere. Nothing
    is kept between batches.
    """

    def __init__(self, config: RunConfig, requests: RequestEvaluator):
        self.config = config
        self.requests = requests
        master_seed = derive_seed(config.seed, Stream.SCENARIOS)
        self.scenarios = [
            ScenarioSpec(master_seed=master_seed, scenario_id=s) for s in sorted(config.training_scenarios)
        ]

    def __call__(self, genomes: Sequence[CppnGenome]) -> List[float]:
        batch: List[EvaluationRequest] = []
        owners: List[int] = []
        for index, genome in enumerate(genomes):
            morphology = decode_genome(genome, self.config)
            if voxel_count(morphology) < MIN_VOXELS:
                continue
            document = morphology.to_document()
            for scenario in self.scenarios:
                batch.append(
                    EvaluationRequest(
                        request_id=f"g{genome.key}:s{scenario.scenario_id}:{index}",
                        morphology=document,
                        scenario=scenario,
                        sim_config=self.config.simulation,
                        fitness_config=self.config.fitness,
                    )
                )
                owners.append(index)

        totals = [0.0] * len(genomes)
        for owner, response in zip(owners, self.requests(batch) if batch else []):
            totals[owner] += response.fitness
        return [t / len(self.scenarios) for t in totals]

