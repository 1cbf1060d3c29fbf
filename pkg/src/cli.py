"""``morphoneat`` command line: evolve, serve, robustness, analyze, scenarios."""

import json
import socket
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import click
import pandas as pd

from src.core.config import parse_bind_address, settings
from src.core.exceptions import ConfigurationError, EvaluationAbortedError
from src.core.logging import bind_run_context, clear_run_context, get_logger, setup_logging, verbosity_level
from src.core.serialization import canonical_dumps, write_canonical
from src.models.config import (
    FitnessConfig,
    LatticeDims,
    RunConfig,
    ServerPoolConfig,
    SimConfig,
    load_run_config,
)
from src.models.evaluation import RequestEvaluator, ScenarioSpec
from src.models.morphology import MorphologyDocument

logger = get_logger(__name__)

EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_ABORTED = 3


class CommandFailed(click.ClickException):
    """Printed as ``Error: message``; exits with ``exit_code``."""

    def __init__(self, message: str, exit_code: int = EXIT_FAILED):
        super().__init__(message)
        self.exit_code = exit_code


def _load_config(path: str) -> RunConfig:
    try:
        return load_run_config(path)
    except ConfigurationError as exc:
        raise CommandFailed(str(exc), EXIT_USAGE) from exc


def _request_evaluator(endpoints: Sequence[str]) -> RequestEvaluator:
    from src.services.dispatcher import ServerPool
    from src.services.local import LocalEvaluator

    if endpoints:
        return ServerPool(
            ServerPoolConfig(
                endpoints=list(endpoints),
                retry_limit=settings.CLIENT_RETRY_LIMIT,
                timeout=settings.CLIENT_TIMEOUT_SECONDS,
            )
        )
    return LocalEvaluator()


def _close(evaluator: object) -> None:
    close = getattr(evaluator, "close", None)
    if callable(close):
        close()


def _parse_dims(value: str) -> LatticeDims:
    try:
        nx, ny, nz = (int(v) for v in value.lower().split("x"))
    except ValueError:
        raise click.BadParameter(f"expected NXxNYxNZ, got {value!r}")
    return LatticeDims(nx=nx, ny=ny, nz=nz)


@click.group()
@click.version_option(settings.APP_VERSION, prog_name=settings.APP_NAME)
@click.option("-v", "--verbose", count=True, help="Log debug events.")
@click.option("-q", "--quiet", is_flag=True, help="Log warnings and errors only.")
def cli(verbose: int, quiet: bool) -> None:
    """Evolve and benchmark voxel soft-actuator morphologies."""
    setup_logging(verbosity_level(verbose, quiet))


@cli.command()
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--output-dir", type=click.Path(file_okay=False), help="Overrides the config and OUTPUT_DIR.")
@click.option("--dry-run", is_flag=True, help="Validate and print the plan; write nothing.")
def evolve(config_path: str, output_dir: Optional[str], dry_run: bool) -> None:
    """Run the evolutionary algorithm a config file describes."""
    config = _load_config(config_path)
    out = Path(output_dir or config.output_dir or settings.OUTPUT_DIR)
    evaluation = config.evaluation
    plan = {
        "algorithm": config.algorithm.value,
        "seed": config.seed,
        "population_size": config.neat.population_size,
        "generations": config.neat.generations,
        "lattice": [config.lattice.nx, config.lattice.ny, config.lattice.nz],
        "training_scenarios": list(config.training_scenarios),
        "evaluation": evaluation.endpoints if isinstance(evaluation, ServerPoolConfig) else "local",
        "output_dir": str(out),
        "checkpoint_interval": config.checkpoint_interval,
    }
    if dry_run:
        click.echo(canonical_dumps(plan, indent=True))
        return

    from src.evolution.neat import evolve as run_evolution
    from src.morphology.decoders import decode_genome
    from src.services.pipeline import GenomeEvaluator, make_request_evaluator

    bind_run_context(algorithm=config.algorithm.value, seed=config.seed)
    requests = make_request_evaluator(evaluation)
    try:
        best, record = run_evolution(config, GenomeEvaluator(config, requests), checkpoint_dir=out / "checkpoints")
    except EvaluationAbortedError as exc:
        raise CommandFailed(f"run aborted: {exc}; last checkpoint: {exc.checkpoint}", EXIT_ABORTED) from exc
    finally:
        _close(requests)
        clear_run_context()

    record.write_csv(out / "record.csv")
    write_canonical(out / "best_genome.json", best.to_document())
    write_canonical(out / "best_morphology.json", decode_genome(best, config).to_document())
    write_canonical(out / "config.json", config)
    final = record.generations[-1]
    click.echo(f"best fitness {final.best_fitness:.6f} after {final.generation} generations; artifacts in {out}")


def _port_in_use(host: str, port: int) -> bool:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((host, port))
        except OSError:
            return True
    return False


@cli.command()
@click.option("--bind", "bind_address", default=None, help="host:port (default BIND_ADDRESS).")
@click.option("--workers", type=click.IntRange(min=1), default=None, help="Simulation workers (default: CPU count).")
@click.option("--executor", type=click.Choice(["process", "thread"]), default=None)
def serve(bind_address: Optional[str], workers: Optional[int], executor: Optional[str]) -> None:
    """Run an evaluation server until SIGTERM/SIGINT; in-flight work drains first."""
    import uvicorn

    from src.main import create_app

    try:
        host, port = parse_bind_address(bind_address or settings.BIND_ADDRESS)
    except ValueError as exc:
        raise CommandFailed(str(exc), EXIT_USAGE) from exc
    if _port_in_use(host, port):
        raise CommandFailed(f"{host}:{port} is already in use", EXIT_USAGE)

    bind_run_context(server_id=settings.SERVER_ID)
    app = create_app(workers, executor_kind=executor)
    uvicorn.run(
        app,
        host=host,
        port=port,
        log_config=None,
        timeout_graceful_shutdown=settings.GRACEFUL_SHUTDOWN_SECONDS,
    )


def _robustness_configs(
    config: Optional[RunConfig], document: MorphologyDocument
) -> Tuple[SimConfig, FitnessConfig]:
    volume = document.dims[0] * document.dims[1] * document.dims[2]
    if config is None:
        return SimConfig(), FitnessConfig(upsilon_max=volume)
    if config.fitness.upsilon_max != volume:
        raise ConfigurationError(
            f"morphology lattice {document.dims} does not match the configured lattice volume "
            f"{config.fitness.upsilon_max}"
        )
    return config.simulation, config.fitness


@cli.command()
@click.argument("morphology_files", nargs=-1, required=True, type=click.Path(dir_okay=False))
@click.option("--scenarios", "scenario_count", type=click.IntRange(min=1), default=500, show_default=True)
@click.option("--master-seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Take sim/fitness settings from a run config.")
@click.option("--endpoint", "endpoints", multiple=True, help="Evaluation server URL; repeat for several.")
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--dump-offsets", is_flag=True, help="Print each morphology's phase offsets per scenario.")
def robustness(
    morphology_files: Tuple[str, ...],
    scenario_count: int,
    master_seed: int,
    config_path: Optional[str],
    endpoints: Tuple[str, ...],
    output_dir: Optional[str],
    dump_offsets: bool,
) -> None:
    """Evaluate morphologies under scenarios 0..N-1 sharing one master seed."""
    from src.fitness.batch import evaluate_batch, robustness_frame, write_robustness_csv
    from src.morphology.voxels import Morphology
    from src.simulator.scenario import offset_table

    config = _load_config(config_path) if config_path else None
    out = Path(output_dir or settings.OUTPUT_DIR) / "robustness"
    scenarios = [ScenarioSpec(master_seed=master_seed, scenario_id=s) for s in range(scenario_count)]
    evaluator = _request_evaluator(endpoints)
    failures = 0
    try:
        for name in morphology_files:
            path = Path(name)
            try:
                document = MorphologyDocument.model_validate(json.loads(path.read_text(encoding="utf-8")))
                sim_config, fitness_config = _robustness_configs(config, document)
                morphology = Morphology.from_document(document, provenance=str(path))
            except (OSError, ValueError, ConfigurationError) as exc:
                failures += 1
                click.echo(f"error: {path}: {exc}", err=True)
                continue
            if dump_offsets:
                active = morphology.occupied()
                for scenario in scenarios:
                    for x, y, z, offset in offset_table(scenario, morphology.dims, active):
                        click.echo(f"{path.stem}\t{scenario.scenario_id}\t{x}\t{y}\t{z}\t{offset!r}")
            try:
                values = evaluate_batch(morphology, scenarios, sim_config, fitness_config, evaluator, label=path.stem)
            except EvaluationAbortedError as exc:
                raise CommandFailed(f"{path}: {exc}", EXIT_ABORTED) from exc
            target = write_robustness_csv(out / f"{path.stem}.csv", robustness_frame(scenarios, values))
            logger.info("robustness written", morphology=str(path), path=str(target), scenarios=scenario_count)
            click.echo(str(target))
    finally:
        _close(evaluator)
    if failures:
        raise CommandFailed(f"{failures} of {len(morphology_files)} morphology files failed")


def _align_scenarios(frames: Dict[str, pd.DataFrame]) -> Dict[str, pd.DataFrame]:
    """Restrict every frame to the scenario ids all frames share."""
    ids = [set(frame["scenario_id"]) for frame in frames.values()]
    if len(set(map(frozenset, ids))) > 1:
        shared = set.intersection(*ids)
        if not shared:
            raise CommandFailed("no shared scenarios: the robustness files cover disjoint scenario ids")
        logger.warning("scenario sets differ; using their intersection", shared=len(shared))
        click.echo(f"warning: scenario sets differ, analysing the {len(shared)} shared scenarios", err=True)
        frames = {
            label: frame[frame["scenario_id"].isin(shared)].sort_values("scenario_id").reset_index(drop=True)
            for label, frame in frames.items()
        }
    return frames


@cli.command()
@click.argument("csv_paths", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metric", type=click.Choice(["displacement", "fitness"]), default="displacement", show_default=True)
@click.option("--output-dir", type=click.Path(file_okay=False), default=None)
@click.option("--alpha", type=float, default=0.01, show_default=True, help="Significance level for tiers.")
def analyze(csv_paths: Tuple[str, ...], metric: str, output_dir: Optional[str], alpha: float) -> None:
    """Compare robustness CSVs: Kruskal-Wallis, Dunn's test, rankings and KDE curves."""
    from src.analysis.density import kde, write_density_csv
    from src.analysis.stats import SampleGroup, compare_groups, format_ranking
    from src.analysis.summary import results_table, summarize, summary_frame
    from src.fitness.batch import read_robustness_csv

    out = Path(output_dir or settings.OUTPUT_DIR) / "analysis"
    frames: Dict[str, pd.DataFrame] = {}
    for name in csv_paths:
        try:
            frames[Path(name).stem] = read_robustness_csv(name)
        except (OSError, ValueError) as exc:
            raise CommandFailed(f"{name}: {exc}") from exc
    frames = _align_scenarios(frames)
    groups = [SampleGroup(label, tuple(frame[metric])) for label, frame in frames.items()]

    summaries = [summarize(g) for g in groups]
    table = results_table(frames)
    report: Dict = {
        "metric": metric,
        "groups": [g.label for g in groups],
        "summary": summary_frame(summaries).to_dict(orient="records"),
        "table": table.to_dict(orient="records"),
    }
    if len(groups) >= 2:
        test = compare_groups(groups, alpha=alpha)
        report["test"] = test.to_document()
        report["ranking_text"] = format_ranking(test.tiers)
    else:
        report["test"] = None
        report["note"] = "fewer than two groups: statistic undefined, summary only"

    curves: List[str] = []
    for group in groups:
        curve = kde(group.values)
        curves.append(str(write_density_csv(curve, out / "kde" / f"{group.label}.csv")))
    report["kde_files"] = curves
    write_canonical(out / "report.json", report)
    table.to_csv(out / "table.csv", index=False, float_format="%.17g", lineterminator="\n")

    click.echo(table.to_string(index=False))
    if report["test"] is not None:
        click.echo(f"\nKruskal-Wallis H = {report['test']['statistic']:.4f}, p = {report['test']['p_value']:.3g}")
        click.echo(f"ranking: {report['ranking_text']}")
    else:
        click.echo(f"\n{report['note']}")


@cli.command()
@click.option("--master-seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--scenario-id", "scenario_ids", type=click.IntRange(min=0), multiple=True, default=(0,), show_default=True)
@click.option("--dims", default="8x8x7", show_default=True, help="Lattice as NXxNYxNZ.")
def scenarios(master_seed: int, scenario_ids: Tuple[int, ...], dims: str) -> None:
    """Print phase-offset tables (scenario, x, y, z, offset)."""
    import numpy as np

    from src.simulator.scenario import offset_table

    lattice = _parse_dims(dims)
    coords = np.argwhere(np.ones((lattice.nx, lattice.ny, lattice.nz), dtype=bool))
    for scenario_id in scenario_ids:
        spec = ScenarioSpec(master_seed=master_seed, scenario_id=scenario_id)
        for x, y, z, offset in offset_table(spec, lattice, coords):
            click.echo(f"{scenario_id}\t{x}\t{y}\t{z}\t{offset!r}")


def main() -> None:
    cli(prog_name=settings.APP_NAME)


if __name__ == "__main__":
    main()
