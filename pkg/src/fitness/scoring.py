"""Displacement, volume and combined fitness scores."""

from dataclasses import dataclass

from src.models.config import FitnessConfig, FitnessMode
from src.models.evaluation import EvaluationResponse, EvaluationStatus
from src.simulator.engine import SimulationResult


@dataclass(frozen=True)
class FitnessValue:
    value: float
    delta_score: float
    nu_score: float
    displacement: float = 0.0
    voxel_count: int = 0
    status: EvaluationStatus = EvaluationStatus.OK

    @classmethod
    def from_response(cls, response: EvaluationResponse) -> "FitnessValue":
        return cls(
            value=response.fitness,
            delta_score=response.delta_score,
            nu_score=response.nu_score,
            displacement=response.displacement,
            voxel_count=response.voxel_count,
            status=response.status,
        )


def displacement_score(delta: float, cfg: FitnessConfig) -> float:
    """delta / delta_max, clamped to [0, 1] unless ``clamp_delta`` is off."""
    score = delta / cfg.delta_max
    if cfg.clamp_delta:
        score = min(max(score, 0.0), 1.0)
    return score


def volume_score(count: int, cfg: FitnessConfig) -> float:
    """1 - count / upsilon_max; fewer voxels score higher."""
    return 1.0 - count / cfg.upsilon_max


def combined_fitness(result: SimulationResult, cfg: FitnessConfig) -> FitnessValue:
    if result.status is not EvaluationStatus.OK:
        return FitnessValue(0.0, 0.0, 0.0, result.displacement, result.voxel_count, result.status)
    delta = displacement_score(result.displacement, cfg)
    nu = volume_score(result.voxel_count, cfg)
    if cfg.mode is FitnessMode.DISPLACEMENT_ONLY:
        value = result.displacement
    else:
        value = 0.5 * delta + 0.5 * nu
    return FitnessValue(value, delta, nu, result.displacement, result.voxel_count, result.status)
