"""Client side of the evaluation protocol: fan a generation out over a server pool.

Endpoints are weighted by the worker count each server advertises on its health
endpoint and picked by smooth weighted round-robin. Each endpoint has its own
in-flight limit. A failed attempt (connection error, timeout, non-200 status, or a
response for another request) is retried on the next endpoint.
"""

import asyncio
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import httpx

from src.core.exceptions import EvaluationAbortedError
from src.core.logging import get_logger
from src.models.config import ServerPoolConfig
from src.models.evaluation import (
    EvaluationRequest,
    EvaluationResponse,
    EvaluationStatus,
    HealthResponse,
)

logger = get_logger(__name__)

EVALUATE_PATH = "/api/v1/evaluate"
HEALTH_PATH = "/api/v1/health"
ABORT_FAILURE_FRACTION = 0.5


@dataclass
class _Endpoint:
    url: str
    weight: int
    limit: asyncio.Semaphore
    current: int = 0


def failed_response(request: EvaluationRequest) -> EvaluationResponse:
    return EvaluationResponse(
        request_id=request.request_id,
        status=EvaluationStatus.ERROR,
        displacement=0.0,
        voxel_count=0,
        fitness=0.0,
        delta_score=0.0,
        nu_score=0.0,
        server_id="",
        compute_ms=0,
    )


class ServerPool:
    """Dispatches request batches over HTTP; callable as a request evaluator."""

    def __init__(self, config: ServerPoolConfig, *, transport: Optional[httpx.AsyncBaseTransport] = None):
        self.config = config
        self._transport = transport

    def _client(self) -> httpx.AsyncClient:
        return httpx.AsyncClient(transport=self._transport, timeout=self.config.timeout)

    async def discover(self, client: httpx.AsyncClient) -> List[_Endpoint]:
        """Ask every endpoint for its worker count; unreachable endpoints are left out."""

        async def check(url: str) -> Optional[_Endpoint]:
            try:
                reply = await client.get(url + HEALTH_PATH)
                reply.raise_for_status()
                health = HealthResponse.model_validate(reply.json())
            except (httpx.HTTPError, ValueError) as exc:
                logger.warning("endpoint unavailable", endpoint=url, error=str(exc))
                return None
            weight = max(1, health.worker_count)
            limit = self.config.max_in_flight or weight
            return _Endpoint(url, weight, asyncio.Semaphore(limit))

        reachable = await asyncio.gather(*(check(url) for url in self.config.endpoints))
        return [e for e in reachable if e is not None]

    @staticmethod
    def _pick(endpoints: List[_Endpoint], exclude: Optional[_Endpoint]) -> _Endpoint:
        candidates = [e for e in endpoints if e is not exclude] or endpoints
        total = sum(e.weight for e in candidates)
        for e in candidates:
            e.current += e.weight
        chosen = max(candidates, key=lambda e: e.current)
        chosen.current -= total
        return chosen

    async def _send(
        self, client: httpx.AsyncClient, endpoints: List[_Endpoint], request: EvaluationRequest
    ) -> Optional[EvaluationResponse]:
        body = request.model_dump_json()
        last: Optional[_Endpoint] = None
        for attempt in range(self.config.retry_limit + 1):
            endpoint = self._pick(endpoints, last)
            try:
                async with endpoint.limit:
                    reply = await client.post(
                        endpoint.url + EVALUATE_PATH,
                        content=body,
                        headers={"content-type": "application/json"},
                    )
                reply.raise_for_status()
                response = EvaluationResponse.model_validate_json(reply.content)
                if response.request_id != request.request_id:
                    raise ValueError(f"response for {response.request_id}")
                return response
            except (httpx.HTTPError, ValueError) as exc:
                logger.warning(
                    "evaluation attempt failed",
                    request_id=request.request_id,
                    endpoint=endpoint.url,
                    attempt=attempt + 1,
                    error=str(exc),
                )
                last = endpoint
        return None

    async def dispatch(self, requests: Sequence[EvaluationRequest]) -> List[EvaluationResponse]:
        """Evaluate ``requests`` concurrently; responses are returned in request order.

        Raises:
            EvaluationAbortedError: more than half of the requests failed.
        """
        if not requests:
            return []
        async with self._client() as client:
            endpoints = await self.discover(client)
            if not endpoints:
                raise EvaluationAbortedError(
                    f"no evaluation server reachable among {', '.join(self.config.endpoints)}"
                )
            results = await asyncio.gather(*(self._send(client, endpoints, r) for r in requests))

        by_id: Dict[str, EvaluationResponse] = {}
        failures = 0
        out: List[EvaluationResponse] = []
        for request, response in zip(requests, results):
            if response is None:
                failures += 1
                logger.error("evaluation failed on every endpoint", request_id=request.request_id)
                response = failed_response(request)
            by_id.setdefault(request.request_id, response)
            out.append(by_id[request.request_id])
        if failures > ABORT_FAILURE_FRACTION * len(requests):
            raise EvaluationAbortedError(f"{failures} of {len(requests)} evaluations failed")
        return out

    def __call__(self, requests: Sequence[EvaluationRequest]) -> List[EvaluationResponse]:
        return asyncio.run(self.dispatch(requests))


async def dispatch_generation(
    pool: ServerPoolConfig,
    requests: Sequence[EvaluationRequest],
    *,
    transport: Optional[httpx.AsyncBaseTransport] = None,
) -> List[EvaluationResponse]:
    return await ServerPool(pool, transport=transport).dispatch(requests)
