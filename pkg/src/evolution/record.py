"""Per-generation run record and checkpoint files."""

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from src.core.logging import get_logger
from src.core.serialization import read_json, write_canonical
from src.genome.genome import CppnGenome

logger = get_logger(__name__)

RECORD_COLUMNS = [
    "generation",
    "best_fitness",
    "mean_fitness",
    "species_count",
    "best_key",
    "best_nodes",
    "best_connections",
]


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_fitness: float
    mean_fitness: float
    species_count: int  # Pareto-front size for AFPO
    best_key: int
    best_nodes: int
    best_connections: int


@dataclass
class EvolutionRecord:
    algorithm: str
    generations: List[GenerationStats] = field(default_factory=list)
    best_genomes: List[Dict[str, Any]] = field(default_factory=list)

    def append(
        self,
        generation: int,
        fitness: List[float],
        species_count: int,
        best: CppnGenome,
        best_fitness: float,
    ) -> GenerationStats:
        nodes, connections = best.size()
        stats = GenerationStats(
            generation=generation,
            best_fitness=best_fitness,
            mean_fitness=sum(fitness) / len(fitness),
            species_count=species_count,
            best_key=best.key,
            best_nodes=nodes,
            best_connections=connections,
        )
        self.generations.append(stats)
        self.best_genomes.append(best.to_document())
        return stats

    def best_series(self) -> List[float]:
        return [g.best_fitness for g in self.generations]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(g) for g in self.generations], columns=RECORD_COLUMNS)

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
        return path

    def to_document(self) -> Dict[str, Any]:
        return {
            "algorithm": self.algorithm,
            "generations": [asdict(g) for g in self.generations],
            "best_genomes": self.best_genomes,
        }

    @classmethod
    def from_document(cls, doc: Dict[str, Any]) -> "EvolutionRecord":
        return cls(
            algorithm=doc["algorithm"],
            generations=[GenerationStats(**g) for g in doc["generations"]],
            best_genomes=list(doc["best_genomes"]),
        )


def checkpoint_path(directory: Union[str, Path], generation: int) -> Path:
    return Path(directory) / f"checkpoint-{generation:05d}.json"


def write_checkpoint(directory: Union[str, Path], generation: int, state: Dict[str, Any]) -> Path:
    """Write one canonical-JSON checkpoint document."""
    path = write_canonical(checkpoint_path(directory, generation), {"generation": generation, **state})
    logger.info("checkpoint written", path=str(path), generation=generation)
    return path


@dataclass
class Checkpoint:
    generation: int
    algorithm: str
    population: List[CppnGenome]
    fitness: List[Optional[float]]
    record: EvolutionRecord
    state: Dict[str, Any]


def read_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """Load a checkpoint for inspection; genomes come back validated."""
    doc = read_json(path)
    return Checkpoint(
        generation=doc["generation"],
        algorithm=doc["algorithm"],
        population=[CppnGenome.from_document(g) for g in doc["population"]],
        fitness=list(doc["fitness"]),
        record=EvolutionRecord.from_document(doc["record"]),
        state={k: v for k, v in doc.items() if k not in {"generation", "algorithm", "population", "fitness", "record"}},
    )
