"""Descriptive statistics and the per-morphology results table."""

from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from src.analysis.stats import SampleGroup

TABLE_COLUMNS = ["Morphology", "Number of voxels", "Mean displacement", "Fitness value"]


@dataclass(frozen=True)
class GroupSummary:
    label: str
    count: int
    minimum: float
    maximum: float
    median: float
    mean: float
    sd: float


def summarize(group: SampleGroup) -> GroupSummary:
    values = np.asarray(group.values, dtype=np.float64)
    return GroupSummary(
        label=group.label,
        count=values.size,
        minimum=float(values.min()),
        maximum=float(values.max()),
        median=float(np.median(values)),
        mean=float(values.mean()),
        sd=float(values.std(ddof=1)) if values.size > 1 else 0.0,
    )


def summary_frame(summaries: Sequence[GroupSummary]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "label": s.label,
                "n": s.count,
                "min": s.minimum,
                "max": s.maximum,
                "median": s.median,
                "mean": s.mean,
                "sd": s.sd,
            }
            for s in summaries
        ]
    )


def results_table(frames: Dict[str, pd.DataFrame]) -> pd.DataFrame:
    """One row per morphology: voxel count, mean displacement, mean fitness.

    ``frames`` maps a label to its robustness frame (columns as written by the
    robustness benchmark).
    """
    rows: List[Dict] = []
    for label, frame in frames.items():
        rows.append(
            {
                "Morphology": label,
                "Number of voxels": int(frame["voxel_count"].iloc[0]),
                "Mean displacement": float(frame["displacement"].mean()),
                "Fitness value": float(frame["fitness"].mean()),
            }
        )
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)
