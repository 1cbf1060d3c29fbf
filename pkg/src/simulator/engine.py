"""Semi-implicit Euler integration of a voxel lattice over the settle/run schedule."""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.core.exceptions import ContractViolationError
from src.core.logging import get_logger
from src.models.config import DisplacementPlane, SimConfig
from src.models.evaluation import EvaluationStatus, ScenarioSpec
from src.morphology.voxels import Morphology, VoxelState, is_connected, voxel_count
from src.simulator.lattice import MassSpringSystem, build_lattice
from src.simulator.scenario import phase_offset

logger = get_logger(__name__)

MIN_VOXELS = 2


@dataclass(frozen=True)
class SimulationResult:
    displacement: float  # voxel-edge lengths
    voxel_count: int
    settled_com: Tuple[float, float, float]
    final_com: Tuple[float, float, float]
    status: EvaluationStatus


class Integrator:
    """Advances a :class:`MassSpringSystem` with fixed timestep ``cfg.timestep``."""

    def __init__(self, system: MassSpringSystem, cfg: SimConfig, phases: Optional[np.ndarray] = None):
        self.system = system
        self.cfg = cfg
        self.phases = np.zeros(system.active_voxels.shape[0]) if phases is None else phases
        m = cfg.voxel_mass
        self._ground_damping = 2.0 * cfg.damping_ratio * math.sqrt(cfg.ground_stiffness * m)
        self._gravity = np.array([0.0, 0.0, -cfg.gravity])

    def rest_lengths(self, run_time: Optional[float]) -> np.ndarray:
        """Current rest lengths; ``run_time`` is None while actuation is off."""
        s = self.system
        if run_time is None or not self.cfg.actuation_enabled or self.phases.size == 0:
            return s.rest_lengths
        signal = np.sin(2.0 * math.pi * self.cfg.actuation_frequency * run_time + self.phases)
        return s.rest_lengths * (1.0 + self.cfg.actuation_amplitude * (s.actuation @ signal))

    def forces(self, run_time: Optional[float]) -> np.ndarray:
        s, cfg = self.system, self.cfg
        x, v = s.positions, s.velocities
        i, j = s.springs[:, 0], s.springs[:, 1]
        delta = x[j] - x[i]
        length = np.sqrt(np.einsum("ij,ij->i", delta, delta))
        unit = delta / length[:, None]
        closing = np.einsum("ij,ij->i", v[j] - v[i], unit)
        tension = s.stiffness * (length - self.rest_lengths(run_time)) + s.damping * closing
        force = s.incidence @ (tension[:, None] * unit)

        force += s.masses[:, None] * self._gravity
        if cfg.ground_enabled:
            force += self._contact(x, v)
        return force

    def _contact(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Penalty normal force plus Coulomb friction capped at mu * normal."""
        cfg, masses = self.cfg, self.system.masses
        out = np.zeros_like(x)
        touching = x[:, 2] < 0.0
        if not np.any(touching):
            return out
        depth = -x[touching, 2]
        normal = np.maximum(cfg.ground_stiffness * depth - self._ground_damping * v[touching, 2], 0.0)
        out[touching, 2] = normal

        tangential = v[touching, :2]
        speed = np.sqrt(np.einsum("ij,ij->i", tangential, tangential))
        moving = speed > 0.0
        cap = masses[touching] * speed / cfg.timestep
        magnitude = np.minimum(cfg.friction_coefficient * normal, cap)
        direction = np.zeros_like(tangential)
        direction[moving] = tangential[moving] / speed[moving, None]
        out[touching, :2] = -magnitude[:, None] * direction
        return out

    def step(self, run_time: Optional[float]) -> None:
        s, dt = self.system, self.cfg.timestep
        s.velocities += dt * self.forces(run_time) / s.masses[:, None]
        s.positions += dt * s.velocities

    def stable(self) -> bool:
        s = self.system
        if not (np.all(np.isfinite(s.positions)) and np.all(np.isfinite(s.velocities))):
            return False
        speed = np.sqrt(np.einsum("ij,ij->i", s.velocities, s.velocities))
        return bool(speed.max(initial=0.0) <= self.cfg.max_speed)

    def advance(self, steps: int, start_step: int = 0, actuated: bool = False) -> bool:
        """Run ``steps`` steps; returns False as soon as the state becomes unstable.

        ``start_step`` counts steps since actuation began and sets the phase clock.
        """
        dt, interval = self.cfg.timestep, self.cfg.stability_check_interval
        for n in range(steps):
            self.step((start_step + n) * dt if actuated else None)
            if (n + 1) % interval == 0 and not self.stable():
                return False
        return self.stable()


def _steps(duration: float, dt: float) -> int:
    return int(round(duration / dt))


def _distance(a: np.ndarray, b: np.ndarray, plane: DisplacementPlane) -> float:
    delta = b - a
    if plane is DisplacementPlane.XY:
        delta = delta[:2]
    return float(np.sqrt(np.dot(delta, delta)))


def simulate_with_phases(m: Morphology, phases: np.ndarray, cfg: SimConfig) -> SimulationResult:
    """Simulate with an explicit phase field shaped like ``m.grid``.

    Bodies with fewer than two voxels or more than one face-connected component are
    not simulated and come back as ``invalid_morphology``.
    """
    count = voxel_count(m)
    origin = (0.0, 0.0, 0.0)
    if count < MIN_VOXELS or not is_connected(m):
        return SimulationResult(0.0, count, origin, origin, EvaluationStatus.INVALID_MORPHOLOGY)
    phases = np.asarray(phases, dtype=np.float64)
    if phases.shape != m.dims.shape:
        raise ContractViolationError(f"phase field shape {phases.shape} != lattice {m.dims.shape}")

    system = build_lattice(m, cfg)
    active = system.active_voxels
    integrator = Integrator(system, cfg, phases[active[:, 0], active[:, 1], active[:, 2]])

    ok = integrator.advance(_steps(cfg.settle_duration, cfg.timestep))
    settled = system.com().copy()
    if ok:
        ok = integrator.advance(_steps(cfg.run_duration, cfg.timestep), actuated=True)
    final = system.com().copy()
    if not ok:
        logger.warning("simulation unstable", voxels=count, active=int(active.shape[0]))
        return SimulationResult(0.0, count, origin, origin, EvaluationStatus.UNSTABLE)

    displacement = _distance(settled, final, cfg.displacement_plane) / cfg.voxel_edge
    return SimulationResult(
        displacement,
        count,
        tuple(float(c) for c in settled),  # type: ignore[arg-type]
        tuple(float(c) for c in final),  # type: ignore[arg-type]
        EvaluationStatus.OK,
    )


def simulate(m: Morphology, scenario: ScenarioSpec, cfg: SimConfig) -> SimulationResult:
    """Settle under gravity, then actuate with the scenario's phase offsets."""
    phases = np.zeros(m.dims.shape)
    for x, y, z in np.argwhere(m.grid == VoxelState.ACTIVE):
        phases[x, y, z] = phase_offset(scenario, (x, y, z), m.dims)
    return simulate_with_phases(m, phases, cfg)
