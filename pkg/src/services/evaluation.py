"""Request -> response evaluation shared by the HTTP server and the local evaluator."""

import asyncio
import json
import multiprocessing
import time
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from typing import Optional, Union

from pydantic import ValidationError

from src import __version__
from src.core.exceptions import InvalidRequestError, MalformedPayloadError, ServiceOverloadedError
from src.core.logging import get_logger
from src.core.metrics import COMPUTE_SECONDS, EVALUATIONS, IN_FLIGHT, QUEUE_DEPTH, REJECTIONS
from src.fitness.scoring import combined_fitness
from src.models.evaluation import (
    EvaluationRequest,
    EvaluationResponse,
    EvaluationStatus,
    HealthResponse,
)
from src.morphology.voxels import Morphology
from src.simulator.engine import simulate

logger = get_logger(__name__)


def parse_request(payload: Union[bytes, str, dict]) -> EvaluationRequest:
    """Decode and validate a request body.

    Raises:
        MalformedPayloadError: the body is not JSON.
        InvalidRequestError: the JSON violates the request schema.
    """
    if isinstance(payload, (bytes, str)):
        try:
            payload = json.loads(payload)
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise MalformedPayloadError(f"request body is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise InvalidRequestError("request body must be a JSON object")
    try:
        return EvaluationRequest.model_validate(payload)
    except ValidationError as exc:
        raise InvalidRequestError(str(exc)) from exc


def evaluate_request(request: EvaluationRequest, server_id: str) -> EvaluationResponse:
    """Simulate one request. Runs inside worker processes, so it must stay top-level."""
    started = time.perf_counter()
    try:
        morphology = Morphology.from_document(request.morphology)
        result = simulate(morphology, request.scenario, request.sim_config)
        fitness = combined_fitness(result, request.fitness_config)
        status = fitness.status
        values = (fitness.displacement, fitness.voxel_count, fitness.value, fitness.delta_score, fitness.nu_score)
    except Exception:
        logger.exception("evaluation failed", request_id=request.request_id)
        status = EvaluationStatus.ERROR
        values = (0.0, 0, 0.0, 0.0, 0.0)
    elapsed = time.perf_counter() - started
    displacement, voxel_count, value, delta_score, nu_score = values
    return EvaluationResponse(
        request_id=request.request_id,
        status=status,
        displacement=displacement,
        voxel_count=voxel_count,
        fitness=value,
        delta_score=delta_score,
        nu_score=nu_score,
        server_id=server_id,
        compute_ms=int(elapsed * 1000),
    )


def make_executor(kind: str, workers: int) -> Executor:
    if kind == "thread":
        return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="evaluator")
    return ProcessPoolExecutor(max_workers=workers, mp_context=multiprocessing.get_context("spawn"))


class EvaluationService:
    """Bounded worker pool with a bounded admission queue.

    At most ``worker_count`` simulations run at once; up to ``queue_factor *
    worker_count`` further requests wait. Anything beyond is refused with
    :class:`ServiceOverloadedError`.
    """

    def __init__(
        self,
        worker_count: int,
        *,
        queue_factor: int = 4,
        executor_kind: str = "process",
        server_id: str = "local",
        executor: Optional[Executor] = None,
    ):
        self.worker_count = worker_count
        self.capacity = worker_count * (1 + queue_factor)
        self.server_id = server_id
        self._executor = executor or make_executor(executor_kind, worker_count)
        self._slots = asyncio.Semaphore(worker_count)
        self.pending = 0
        self.in_flight = 0
        self.in_flight_peak = 0
        self.accepting = True

    @property
    def queue_depth(self) -> int:
        return self.pending - self.in_flight

    async def evaluate(self, request: EvaluationRequest) -> EvaluationResponse:
        if not self.accepting:
            REJECTIONS.labels(reason="shutting_down").inc()
            raise ServiceOverloadedError("server is shutting down")
        if self.pending >= self.capacity:
            REJECTIONS.labels(reason="queue_full").inc()
            raise ServiceOverloadedError(
                f"evaluation queue full ({self.pending}/{self.capacity} accepted)"
            )
        self.pending += 1
        QUEUE_DEPTH.set(self.queue_depth)
        try:
            async with self._slots:
                self.in_flight += 1
                self.in_flight_peak = max(self.in_flight_peak, self.in_flight)
                IN_FLIGHT.set(self.in_flight)
                QUEUE_DEPTH.set(self.queue_depth)
                try:
                    loop = asyncio.get_running_loop()
                    response = await loop.run_in_executor(
                        self._executor, evaluate_request, request, self.server_id
                    )
                finally:
                    self.in_flight -= 1
                    IN_FLIGHT.set(self.in_flight)
        finally:
            self.pending -= 1
            QUEUE_DEPTH.set(self.queue_depth)
        EVALUATIONS.labels(status=response.status.value).inc()
        COMPUTE_SECONDS.observe(response.compute_ms / 1000.0)
        return response

    def health(self) -> HealthResponse:
        return HealthResponse(
            status="ok" if self.accepting else "draining",
            worker_count=self.worker_count,
            queue_depth=self.queue_depth,
            in_flight=self.in_flight,
            in_flight_peak=self.in_flight_peak,
            version=__version__,
            server_id=self.server_id,
        )

    def shutdown(self, wait: bool = True) -> None:
        """Stop admitting work; with ``wait`` block until running simulations finish."""
        self.accepting = False
        logger.info("evaluation service stopping", in_flight=self.in_flight, pending=self.pending)
        self._executor.shutdown(wait=wait)
