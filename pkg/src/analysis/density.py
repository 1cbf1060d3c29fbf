"""Gaussian kernel density curves for displacement distributions."""

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from scipy.stats import iqr, norm

from src.core.exceptions import ContractViolationError

GRID_POINTS = 256
MARGIN_BANDWIDTHS = 3.0


@dataclass(frozen=True)
class DensityCurve:
    x: np.ndarray
    density: np.ndarray
    bandwidth: float
    degenerate: bool = False

    def integral(self) -> float:
        return float(trapezoid(self.density, self.x))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"x": self.x, "density": self.density})


def silverman_bandwidth(values: np.ndarray) -> float:
    """0.9 * min(sd, IQR/1.34) * n^(-1/5); falls back to sd when the IQR is 0."""
    sd = float(np.std(values, ddof=1))
    spread = float(iqr(values)) / 1.34
    scale = min(sd, spread) if spread > 0.0 else sd
    return 0.9 * scale * len(values) ** -0.2


def kde(
    values: Sequence[float],
    bandwidth: Union[str, float] = "silverman",
    *,
    grid_points: int = GRID_POINTS,
    margin: float = MARGIN_BANDWIDTHS,
) -> DensityCurve:
    """Density on an even grid over [min - margin*h, max + margin*h].

    Fewer than two distinct values is flagged ``degenerate``; without a fixed bandwidth
    such data gets a unit-width spike.
    """
    data = np.asarray(values, dtype=np.float64)
    if data.size == 0 or not np.all(np.isfinite(data)):
        raise ContractViolationError("kde needs a nonempty set of finite values")
    degenerate = np.unique(data).size < 2

    if bandwidth == "silverman":
        h = 1.0 if degenerate else silverman_bandwidth(data)
    else:
        h = float(bandwidth)
        if h <= 0.0:
            raise ContractViolationError("bandwidth must be positive")

    grid = np.linspace(data.min() - margin * h, data.max() + margin * h, grid_points)
    density = norm.pdf((grid[:, None] - data[None, :]) / h).sum(axis=1) / (data.size * h)
    return DensityCurve(grid, density, h, degenerate)


def write_density_csv(curve: DensityCurve, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    curve.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path
