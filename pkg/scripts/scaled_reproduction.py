#!/usr/bin/env python3
"""Scaled-down comparison of NEAT, HyperNEAT and AFPO.

Evolves every algorithm on a 4x4x3 lattice for a few seeds, evaluates each run's
best morphology on a shared scenario set and ranks the algorithms by displacement.
The report checks three outcomes:

- ``improves``: every algorithm's best fitness beats its generation-0 best in at least
  two thirds of the seeds (hard).
- ``hyperneat_smaller``: HyperNEAT's best morphology has no more voxels than AFPO's in
  at least two thirds of the seeds (soft; a miss is logged, not fatal).
- ``elitist_monotone``: NEAT and HyperNEAT best-fitness curves never decrease (hard).

The simulated schedule is shorter than the full 1 s settle + 10 s run so the workload
fits a laptop. Before evolving, one simulation of a completely filled lattice is timed
and the generation count is cut until the projected wall time fits ``--budget-minutes``.
Everything lands under ``--output-dir``; the final report is ``analysis/report.json``.
"""

import math
import time
from pathlib import Path
from typing import Dict, List

import click
import numpy as np
import pandas as pd

from src.analysis.stats import SampleGroup, compare_groups, format_ranking
from src.analysis.summary import results_table
from src.core.logging import bind_run_context, clear_run_context, get_logger, setup_logging
from src.core.serialization import write_canonical
from src.evolution.neat import evolve
from src.fitness.batch import evaluate_batch, robustness_frame, write_robustness_csv
from src.models.config import LatticeDims, RunConfig, SimConfig
from src.models.evaluation import ScenarioSpec
from src.morphology.decoders import decode_genome
from src.morphology.voxels import Morphology, VoxelState, voxel_count
from src.services.local import LocalEvaluator
from src.services.pipeline import GenomeEvaluator
from src.simulator.engine import simulate

logger = get_logger("scaled_reproduction")

ALGORITHMS = ("neat", "hyperneat", "afpo")
ELITIST = ("neat", "hyperneat")
LATTICE = LatticeDims(nx=4, ny=4, nz=3)
FULL_SETTLE, FULL_RUN = 1.0, 10.0
MIN_GENERATIONS = 10


def run_config(algorithm: str, seed: int, population: int, generations: int, simulation: SimConfig) -> RunConfig:
    return RunConfig.model_validate(
        {
            "algorithm": algorithm,
            "seed": seed,
            "neat": {"population_size": population, "generations": generations},
            "lattice": LATTICE.model_dump(),
            "fitness": {"upsilon_max": LATTICE.volume},
            "simulation": simulation.model_dump(),
        }
    )


def time_full_body(simulation: SimConfig) -> float:
    """Seconds for one simulation of a filled lattice, the most expensive body."""
    grid = np.full(LATTICE.shape, VoxelState.PASSIVE, dtype=np.int8)
    grid[::2] = VoxelState.ACTIVE
    started = time.perf_counter()
    simulate(Morphology(LATTICE, grid), ScenarioSpec(master_seed=0, scenario_id=0), simulation)
    return time.perf_counter() - started


def fit_generations(
    per_simulation: float,
    workers: int,
    budget_seconds: float,
    runs: int,
    population: int,
    generations: int,
    robustness_evaluations: int,
) -> int:
    """Largest generation count (at most ``generations``) whose projection fits the budget."""
    capacity = budget_seconds * workers / per_simulation - robustness_evaluations
    affordable = math.floor(capacity / (runs * population)) - 1
    return max(MIN_GENERATIONS, min(generations, affordable))


def majority(hits: int, seeds: int) -> bool:
    return hits >= math.ceil(2 * seeds / 3)


def check_outcomes(
    best_series: Dict[str, List[List[float]]], voxels: Dict[str, List[int]], seeds: int
) -> Dict[str, Dict]:
    improved = {
        algorithm: sum(series[-1] > series[0] for series in runs) for algorithm, runs in best_series.items()
    }
    smaller = sum(h <= a for h, a in zip(voxels["hyperneat"], voxels["afpo"]))
    monotone = {
        algorithm: all(all(b >= a for a, b in zip(s, s[1:])) for s in best_series[algorithm])
        for algorithm in ELITIST
    }
    return {
        "improves": {
            "hard": True,
            "passed": all(majority(n, seeds) for n in improved.values()),
            "seeds_improved": improved,
        },
        "hyperneat_smaller": {
            "hard": False,
            "passed": majority(smaller, seeds),
            "seeds_smaller": smaller,
            "voxels": voxels,
        },
        "elitist_monotone": {"hard": True, "passed": all(monotone.values()), "runs": monotone},
    }


@click.command()
@click.option("--seeds", default=3, show_default=True)
@click.option("--population", default=20, show_default=True)
@click.option("--generations", default=100, show_default=True, help="Upper bound; cut to fit the budget.")
@click.option("--scenarios", "scenario_count", default=50, show_default=True)
@click.option("--settle", "settle_duration", default=0.25, show_default=True, help="Settle seconds.")
@click.option("--run", "run_duration", default=1.0, show_default=True, help="Actuated seconds.")
@click.option("--budget-minutes", default=60.0, show_default=True)
@click.option("--output-dir", default="runs/scaled", show_default=True, type=click.Path(file_okay=False))
def main(
    seeds: int,
    population: int,
    generations: int,
    scenario_count: int,
    settle_duration: float,
    run_duration: float,
    budget_minutes: float,
    output_dir: str,
) -> None:
    """Evolve, evaluate robustness, rank the three algorithms and check the outcomes."""
    setup_logging()
    out = Path(output_dir)
    simulation = SimConfig(settle_duration=settle_duration, run_duration=run_duration)
    if (settle_duration, run_duration) != (FULL_SETTLE, FULL_RUN):
        logger.warning(
            "shortened simulation schedule",
            settle=settle_duration,
            run=run_duration,
            full_settle=FULL_SETTLE,
            full_run=FULL_RUN,
        )
    scenarios = [ScenarioSpec(master_seed=0, scenario_id=s) for s in range(scenario_count)]
    frames: Dict[str, pd.DataFrame] = {}
    best_series: Dict[str, List[List[float]]] = {a: [] for a in ALGORITHMS}
    voxels: Dict[str, List[int]] = {a: [] for a in ALGORITHMS}

    with LocalEvaluator() as requests:
        per_simulation = time_full_body(simulation)
        runs = len(ALGORITHMS) * seeds
        planned = fit_generations(
            per_simulation,
            requests.workers,
            budget_minutes * 60.0,
            runs,
            population,
            generations,
            runs * scenario_count,
        )
        projected = per_simulation * runs * (population * (planned + 1) + scenario_count) / requests.workers
        logger.info(
            "workload sized",
            per_simulation=round(per_simulation, 3),
            workers=requests.workers,
            generations=planned,
            projected_minutes=round(projected / 60.0, 1),
        )
        if planned < generations:
            logger.warning("generation count reduced to fit the budget", requested=generations, planned=planned)

        for algorithm in ALGORITHMS:
            displacement: List[pd.DataFrame] = []
            for seed in range(seeds):
                config = run_config(algorithm, seed, population, planned, simulation)
                bind_run_context(algorithm=algorithm, seed=seed)
                best, record = evolve(config, GenomeEvaluator(config, requests))
                logger.info("run finished", best_fitness=record.generations[-1].best_fitness)
                run_dir = out / algorithm / f"seed-{seed}"
                record.write_csv(run_dir / "record.csv")
                morphology = decode_genome(best, config)
                write_canonical(run_dir / "best_morphology.json", morphology.to_document())
                best_series[algorithm].append(record.best_series())
                voxels[algorithm].append(voxel_count(morphology))

                values = evaluate_batch(
                    morphology, scenarios, config.simulation, config.fitness, requests, label=f"{algorithm}-{seed}"
                )
                frame = robustness_frame(scenarios, values)
                write_robustness_csv(run_dir / "robustness.csv", frame)
                displacement.append(frame)
            frames[algorithm] = pd.concat(displacement, ignore_index=True)
        clear_run_context()

    groups = [SampleGroup(name, tuple(frame["displacement"])) for name, frame in frames.items()]
    report = compare_groups(groups)
    table = results_table(frames)
    outcomes = check_outcomes(best_series, voxels, seeds)
    write_canonical(
        out / "analysis" / "report.json",
        {
            "test": report.to_document(),
            "table": table.to_dict(orient="records"),
            "outcomes": outcomes,
            "schedule": {"settle": settle_duration, "run": run_duration},
            "generations": planned,
        },
    )

    click.echo(table.to_string(index=False))
    click.echo(f"\nH = {report.statistic:.4f}, p = {report.p_value:.3g}")
    click.echo(f"ranking: {format_ranking(report.tiers)}")
    for name, outcome in outcomes.items():
        kind = "hard" if outcome["hard"] else "soft"
        click.echo(f"{name} ({kind}): {'pass' if outcome['passed'] else 'FAIL'}")
        if not outcome["passed"]:
            logger.warning("outcome not met", outcome=name, hard=outcome["hard"])

    failed = [name for name, outcome in outcomes.items() if outcome["hard"] and not outcome["passed"]]
    if failed:
        raise click.ClickException(f"hard outcomes failed: {', '.join(failed)}")


if __name__ == "__main__":
    main()
