"""Health check endpoints."""

from fastapi import APIRouter, Depends, status

from src.api.deps import get_evaluation_service
from src.models.evaluation import HealthResponse
from src.services.evaluation import EvaluationService

router = APIRouter()


@router.get(
    "/health",
    response_model=HealthResponse,
    status_code=status.HTTP_200_OK,
    summary="Health check",
    description="Worker count, queue depth and concurrency of this evaluation server",
)
async def health_check(
    service: EvaluationService = Depends(get_evaluation_service),
) -> HealthResponse:
    return service.health()


@router.get(
    "/health/live",
    status_code=status.HTTP_200_OK,
    summary="Liveness check",
)
async def liveness():
    """Liveness check for container orchestration."""
    return {"status": "alive"}
