"""Evaluation protocol objects exchanged between clients and evaluation servers."""

from enum import Enum
from typing import Callable, List, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.models.config import FitnessConfig, SimConfig
from src.models.morphology import MorphologyDocument


class EvaluationStatus(str, Enum):
    OK = "ok"
    UNSTABLE = "unstable"
    INVALID_MORPHOLOGY = "invalid_morphology"
    ERROR = "error"


class ScenarioSpec(BaseModel):
    """Identifies one controller scenario (a phase-offset field)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    master_seed: int = Field(..., ge=0, lt=2**64)
    scenario_id: int = Field(..., ge=0)


class EvaluationRequest(BaseModel):
    """Self-contained request: the server needs no other state to evaluate it."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    request_id: str = Field(..., min_length=1, max_length=200)
    morphology: MorphologyDocument
    scenario: ScenarioSpec
    sim_config: SimConfig
    fitness_config: FitnessConfig

    @model_validator(mode="after")
    def check_volume(self) -> "EvaluationRequest":
        if self.fitness_config.upsilon_max != self.morphology.volume:
            raise ValueError(
                f"fitness_config.upsilon_max {self.fitness_config.upsilon_max} does not match "
                f"the morphology lattice volume {self.morphology.volume}"
            )
        return self


class EvaluationResponse(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    request_id: str
    status: EvaluationStatus
    displacement: float
    voxel_count: int
    fitness: float
    delta_score: float
    nu_score: float
    server_id: str
    compute_ms: int = Field(..., ge=0)

    def semantic_payload(self) -> dict:
        """Fields that must match between local and remote evaluation."""
        return self.model_dump(mode="json", exclude={"server_id", "compute_ms"})


class HealthResponse(BaseModel):
    status: str
    worker_count: int
    queue_depth: int
    in_flight: int
    in_flight_peak: int
    version: str
    server_id: str


# Resolves a batch of requests to responses in request order (local or remote).
RequestEvaluator = Callable[[Sequence[EvaluationRequest]], List[EvaluationResponse]]
