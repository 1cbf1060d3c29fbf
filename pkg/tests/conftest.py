"""Pytest configuration and fixtures."""

import pytest
from fastapi.testclient import TestClient

from src.main import create_app
from src.models.config import FitnessConfig, SimConfig
from src.models.evaluation import EvaluationRequest, ScenarioSpec
from src.models.morphology import MorphologyDocument

# Two active voxels along x at the lattice origin.
BAR_VOXELS = "2A446E"
QUICK_SIM = SimConfig(settle_duration=0.02, run_duration=0.05)


@pytest.fixture
def make_request():
    """Factory for small, fast evaluation requests."""

    def factory(request_id="r0", scenario_id=0, voxels=BAR_VOXELS, master_seed=0):
        return EvaluationRequest(
            request_id=request_id,
            morphology=MorphologyDocument(dims=[8, 8, 7], voxels=voxels),
            scenario=ScenarioSpec(master_seed=master_seed, scenario_id=scenario_id),
            sim_config=QUICK_SIM,
            fitness_config=FitnessConfig(),
        )

    return factory


@pytest.fixture
def app():
    """Evaluation server with two thread workers."""
    return create_app(2, executor_kind="thread", server_id="test-server")


@pytest.fixture
def client(app):
    """Create a test client for the FastAPI app; runs the lifespan."""
    with TestClient(app) as test_client:
        yield test_client
