"""In-process evaluator with the same request/response semantics as the server."""

from concurrent.futures import Executor
from typing import List, Optional, Sequence, Union

from src.core.config import settings
from src.core.logging import get_logger
from src.models.evaluation import EvaluationRequest, EvaluationResponse
from src.services.evaluation import evaluate_request, make_executor, parse_request

logger = get_logger(__name__)

LOCAL_SERVER_ID = "local"


class LocalEvaluator:
    """Evaluates request batches on a local worker pool; results keep request order.

    With one worker requests run sequentially in the calling thread.
    """

    def __init__(self, workers: Optional[int] = None, executor_kind: Optional[str] = None):
        self.workers = workers or settings.WORKER_COUNT
        self.executor_kind = executor_kind or settings.EXECUTOR_KIND
        self._executor: Optional[Executor] = None

    def __call__(self, requests: Sequence[EvaluationRequest]) -> List[EvaluationResponse]:
        if self.workers == 1 or len(requests) <= 1:
            return [evaluate_request(r, LOCAL_SERVER_ID) for r in requests]
        if self._executor is None:
            self._executor = make_executor(self.executor_kind, self.workers)
        return list(self._executor.map(evaluate_request, requests, [LOCAL_SERVER_ID] * len(requests)))

    def evaluate_payload(self, payload: Union[bytes, str, dict]) -> EvaluationResponse:
        """Validate a raw payload exactly as the server does, then evaluate it."""
        return self([parse_request(payload)])[0]

    def close(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def __enter__(self) -> "LocalEvaluator":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def local_evaluator(workers: Optional[int] = None, executor_kind: Optional[str] = None) -> LocalEvaluator:
    return LocalEvaluator(workers, executor_kind)
