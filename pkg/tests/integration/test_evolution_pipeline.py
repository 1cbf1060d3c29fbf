"""Evolution driven through the full genome -> morphology -> simulation pipeline."""

import pytest

from src.evolution.neat import evolve
from src.main import create_app
from src.models.config import RunConfig, ServerPoolConfig
from src.services.dispatcher import ServerPool
from src.services.local import LocalEvaluator
from src.services.pipeline import GenomeEvaluator
from tests.integration.test_server_pool import HostRouter

pytestmark = [pytest.mark.integration, pytest.mark.slow]


def _config(algorithm):
    return RunConfig.model_validate(
        {
            "algorithm": algorithm,
            "seed": 11,
            "neat": {"population_size": 8, "generations": 3},
            "substrate": {"layer_sizes": [3, 3, 2]},
            "lattice": {"nx": 4, "ny": 4, "nz": 3},
            "fitness": {"upsilon_max": 48},
            "simulation": {"settle_duration": 0.02, "run_duration": 0.05},
            "training_scenarios": [0, 1],
        }
    )


@pytest.mark.parametrize("algorithm", ["neat", "hyperneat", "afpo"])
def test_local_and_remote_runs_agree(algorithm):
    config = _config(algorithm)
    apps = {f"s{i}": create_app(2, executor_kind="thread", server_id=f"s{i}") for i in range(2)}
    pool = ServerPool(
        ServerPoolConfig(endpoints=[f"http://{h}" for h in apps]), transport=HostRouter(apps)
    )

    with LocalEvaluator(2, "thread") as local:
        best_local, record_local = evolve(config, GenomeEvaluator(config, local))
    best_remote, record_remote = evolve(config, GenomeEvaluator(config, pool))

    assert record_local.to_frame().equals(record_remote.to_frame())
    assert best_local.to_document() == best_remote.to_document()
    assert record_local.best_series() == sorted(record_local.best_series())
    for app in apps.values():
        app.state.evaluation_service.shutdown()
