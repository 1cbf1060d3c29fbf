"""Scenario-batch evaluation and the robustness CSV format."""

from pathlib import Path
from typing import List, Sequence, Union

import pandas as pd

from src.fitness.scoring import FitnessValue
from src.models.config import FitnessConfig, SimConfig
from src.models.evaluation import EvaluationRequest, RequestEvaluator, ScenarioSpec
from src.morphology.voxels import Morphology

ROBUSTNESS_COLUMNS = ["scenario_id", "displacement", "voxel_count", "delta_score", "nu_score", "fitness"]


def build_requests(
    m: Morphology,
    scenarios: Sequence[ScenarioSpec],
    sim_config: SimConfig,
    fitness_config: FitnessConfig,
    *,
    label: str = "morphology",
) -> List[EvaluationRequest]:
    """One request per scenario, stably ordered by scenario_id."""
    document = m.to_document()
    ordered = sorted(scenarios, key=lambda s: s.scenario_id)
    return [
        EvaluationRequest(
            request_id=f"{label}:{s.master_seed}:{s.scenario_id}:{i}",
            morphology=document,
            scenario=s,
            sim_config=sim_config,
            fitness_config=fitness_config,
        )
        for i, s in enumerate(ordered)
    ]


def evaluate_batch(
    m: Morphology,
    scenarios: Sequence[ScenarioSpec],
    sim_config: SimConfig,
    fitness_config: FitnessConfig,
    evaluator: RequestEvaluator,
    *,
    label: str = "morphology",
) -> List[FitnessValue]:
    """Evaluate ``m`` under every scenario; results follow ascending scenario_id."""
    if not scenarios:
        return []
    requests = build_requests(m, scenarios, sim_config, fitness_config, label=label)
    return [FitnessValue.from_response(r) for r in evaluator(requests)]


def robustness_frame(scenarios: Sequence[ScenarioSpec], values: Sequence[FitnessValue]) -> pd.DataFrame:
    ordered = sorted(scenarios, key=lambda s: s.scenario_id)
    return pd.DataFrame(
        {
            "scenario_id": [s.scenario_id for s in ordered],
            "displacement": [v.displacement for v in values],
            "voxel_count": [v.voxel_count for v in values],
            "delta_score": [v.delta_score for v in values],
            "nu_score": [v.nu_score for v in values],
            "fitness": [v.value for v in values],
        },
        columns=ROBUSTNESS_COLUMNS,
    )


def write_robustness_csv(path: Union[str, Path], frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # 17 significant digits round-trip float64
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def read_robustness_csv(path: Union[str, Path]) -> pd.DataFrame:
    frame = pd.read_csv(path)
    missing = [c for c in ROBUSTNESS_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"{path}: missing columns {', '.join(missing)}")
    return frame[ROBUSTNESS_COLUMNS]
