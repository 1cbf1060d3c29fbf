"""Run configuration models.

Every model forbids unknown keys; the run configuration file, checkpoints and every
evaluation request carry these exact documents.
"""

import json
import math
import re
from enum import Enum
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.core.exceptions import ConfigurationError
from src.genome.activations import CPPN_ACTIVATIONS, ActivationFunction
from src.models.morphology import MAX_AXIS


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GenomeMode(str, Enum):
    """Input/output arity of a CPPN."""

    NEAT = "neat"
    HYPERNEAT = "hyperneat"

    @property
    def input_count(self) -> int:
        return 3 if self is GenomeMode.NEAT else 5

    @property
    def output_count(self) -> int:
        return 2 if self is GenomeMode.NEAT else 1


class NeatParams(StrictModel):
    """NEAT knobs; defaults reproduce the published parameter table."""

    compatibility_threshold: float = Field(3.0, gt=0.0)
    disjoint_coefficient: float = Field(1.0, ge=0.0)
    weight_coefficient: float = Field(0.5, ge=0.0)
    max_stagnation: int = Field(15, ge=1)
    survival_threshold: float = Field(0.3, gt=0.0, le=1.0)
    activation_mutate_rate: float = Field(0.4, ge=0.0, le=1.0)
    add_connection_rate: float = Field(0.3, ge=0.0, le=1.0)
    delete_connection_rate: float = Field(0.2, ge=0.0, le=1.0)
    toggle_connection_rate: float = Field(0.5, ge=0.0, le=1.0)
    add_node_rate: float = Field(0.3, ge=0.0, le=1.0)
    delete_node_rate: float = Field(0.2, ge=0.0, le=1.0)
    weight_mutate_rate: float = Field(0.8, ge=0.0, le=1.0)
    weight_perturb_sigma: float = Field(0.5, ge=0.0)
    weight_replace_rate: float = Field(0.1, ge=0.0, le=1.0)
    weight_replace_range: float = Field(3.0, gt=0.0)
    bias_mutate_rate: float = Field(0.2, ge=0.0, le=1.0)
    initial_weight_range: float = Field(1.0, gt=0.0)
    add_connection_attempts: int = Field(20, ge=1)
    elitism_min_species_size: int = Field(5, ge=0)
    activation_options: Tuple[ActivationFunction, ...] = CPPN_ACTIVATIONS
    population_size: int = Field(50, ge=2)
    generations: int = Field(1000, ge=0)

    @field_validator("activation_options")
    @classmethod
    def check_activation_options(cls, v: Tuple[ActivationFunction, ...]) -> Tuple[ActivationFunction, ...]:
        if not v:
            raise ValueError("at least one activation function is required")
        return v


class AfpoParams(StrictModel):
    newcomers: int = Field(1, ge=1)


class SubstrateLayout(StrictModel):
    """Layered substrate queried as (x, y, z) -> (pv, m)."""

    layer_sizes: Tuple[int, ...] = (3, 5, 5, 2)
    activation: ActivationFunction = ActivationFunction.RELU

    @field_validator("layer_sizes")
    @classmethod
    def check_layers(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(v) < 3:
            raise ValueError("a substrate needs input, output and at least one hidden layer")
        if v[0] != 3 or v[-1] != 2:
            raise ValueError("substrate must map 3 inputs to 2 outputs")
        hidden = v[1:-1]
        if not 1 <= len(hidden) <= 7:
            raise ValueError("hidden layer count must lie in [1, 7]")
        if any(not 1 <= size <= 7 for size in hidden):
            raise ValueError("hidden layer sizes must lie in [1, 7]")
        return v


class PaintingConfig(StrictModel):
    weight_threshold: float = Field(0.2, ge=0.0, lt=1.0)
    weight_range: float = Field(3.0, gt=0.0)

    @model_validator(mode="after")
    def check_threshold(self) -> "PaintingConfig":
        if self.weight_threshold >= self.weight_range:
            raise ValueError("weight_threshold must be below weight_range")
        return self


class LatticeDims(StrictModel):
    nx: int = Field(8, ge=1, le=MAX_AXIS)
    ny: int = Field(8, ge=1, le=MAX_AXIS)
    nz: int = Field(7, ge=1, le=MAX_AXIS)

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def volume(self) -> int:
        return self.nx * self.ny * self.nz


class DisplacementPlane(str, Enum):
    XYZ = "xyz"
    XY = "xy"


class SimConfig(StrictModel):
    """Mass-spring lattice constants (SI units)."""

    voxel_edge: float = Field(0.01, gt=0.0)
    voxel_mass: float = Field(0.001, gt=0.0)
    structural_stiffness: float = Field(1000.0, gt=0.0)
    shear_stiffness: float = Field(500.0, gt=0.0)
    damping_ratio: float = Field(0.3, gt=0.0)
    gravity: float = Field(9.81, ge=0.0)
    ground_stiffness: float = Field(5000.0, gt=0.0)
    friction_coefficient: float = Field(0.8, gt=0.0)
    actuation_amplitude: float = Field(0.2, gt=0.0, lt=1.0)
    actuation_frequency: float = Field(2.0, gt=0.0)
    settle_duration: float = Field(1.0, ge=0.0)
    run_duration: float = Field(10.0, ge=0.0)
    timestep: float = Field(1e-4, gt=0.0)
    ground_enabled: bool = True
    actuation_enabled: bool = True
    displacement_plane: DisplacementPlane = DisplacementPlane.XYZ
    max_speed: float = Field(1e3, gt=0.0)
    stability_check_interval: int = Field(500, ge=1)

    @model_validator(mode="after")
    def check_stability(self) -> "SimConfig":
        stiffness = max(self.structural_stiffness, self.shear_stiffness, self.ground_stiffness)
        bound = math.sqrt(self.voxel_mass / stiffness) / math.pi
        if self.timestep >= bound:
            raise ValueError(
                f"timestep {self.timestep} violates the explicit-integration bound {bound:.3e}"
            )
        return self


class FitnessMode(str, Enum):
    DISPLACEMENT_ONLY = "displacement_only"
    COMBINED = "combined"


class FitnessConfig(StrictModel):
    delta_max: float = Field(20.0, gt=0.0)
    upsilon_max: int = Field(448, ge=1)
    mode: FitnessMode = FitnessMode.COMBINED
    clamp_delta: bool = True


class ServerPoolConfig(StrictModel):
    endpoints: List[str] = Field(..., min_length=1)
    max_in_flight: Optional[int] = Field(None, ge=1)
    retry_limit: int = Field(3, ge=0)
    timeout: float = Field(120.0, gt=0.0)

    @field_validator("endpoints")
    @classmethod
    def strip_endpoints(cls, v: List[str]) -> List[str]:
        cleaned = [e.rstrip("/") for e in v]
        for endpoint in cleaned:
            if not endpoint.startswith(("http://", "https://")):
                raise ValueError(f"endpoint must be an http(s) URL: {endpoint}")
        return cleaned


class Algorithm(str, Enum):
    NEAT = "neat"
    HYPERNEAT = "hyperneat"
    AFPO = "afpo"

    @property
    def genome_mode(self) -> GenomeMode:
        return GenomeMode.HYPERNEAT if self is Algorithm.HYPERNEAT else GenomeMode.NEAT


class RunConfig(StrictModel):
    """Everything needed to reproduce one evolutionary run."""

    algorithm: Algorithm
    seed: int = Field(..., ge=0)
    neat: NeatParams = NeatParams()
    afpo: AfpoParams = AfpoParams()
    substrate: SubstrateLayout = SubstrateLayout()
    painting: PaintingConfig = PaintingConfig()
    lattice: LatticeDims = LatticeDims()
    simulation: SimConfig = SimConfig()
    fitness: FitnessConfig = FitnessConfig()
    evaluation: Union[Literal["local"], ServerPoolConfig] = "local"
    output_dir: Optional[str] = None
    checkpoint_interval: int = Field(50, ge=1)
    training_scenarios: Tuple[int, ...] = (0,)

    @field_validator("training_scenarios")
    @classmethod
    def check_scenarios(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if not v or any(s < 0 for s in v):
            raise ValueError("training_scenarios needs at least one non-negative id")
        return v

    @model_validator(mode="after")
    def check_volume(self) -> "RunConfig":
        if self.fitness.upsilon_max != self.lattice.volume:
            raise ValueError(
                f"fitness.upsilon_max ({self.fitness.upsilon_max}) must equal the lattice "
                f"volume ({self.lattice.volume})"
            )
        return self


def _key_line(text: str, loc: Tuple) -> Optional[int]:
    """Line of the deepest key in ``loc`` that can be found walking down the document."""
    position, line = 0, None
    for part in loc:
        if not isinstance(part, str):
            continue
        match = re.compile(r'"%s"\s*:' % re.escape(part)).search(text, position)
        if match is None:
            break
        position = match.end()
        line = text.count("\n", 0, match.start()) + 1
    return line


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a JSON run configuration.

    Raises ConfigurationError whose message is anchored to ``path:line``.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}:{exc.lineno}: {exc.msg}", line=exc.lineno) from exc
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = tuple(error["loc"])
        line = _key_line(text, loc) or 1
        where = ".".join(str(p) for p in loc) or "<root>"
        raise ConfigurationError(f"{path}:{line}: {where}: {error['msg']}", line=line) from exc
