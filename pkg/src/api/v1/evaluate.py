"""Evaluation endpoint."""

from fastapi import APIRouter, Depends, Request, status

from src.api.deps import get_evaluation_service
from src.core.logging import get_logger
from src.models.evaluation import EvaluationRequest, EvaluationResponse
from src.services.evaluation import EvaluationService, parse_request

logger = get_logger(__name__)
router = APIRouter()


@router.post(
    "/evaluate",
    response_model=EvaluationResponse,
    status_code=status.HTTP_200_OK,
    summary="Evaluate a morphology",
    description=(
        "Simulate one morphology under one controller scenario. Every simulated outcome, "
        "including an unstable run, is a 200 response."
    ),
    openapi_extra={
        "requestBody": {
            "required": True,
            "content": {"application/json": {"schema": EvaluationRequest.model_json_schema()}},
        }
    },
    responses={
        400: {"description": "Body is not valid JSON"},
        422: {"description": "Request violates the schema"},
        503: {"description": "Evaluation queue is full"},
    },
)
async def evaluate(
    request: Request,
    service: EvaluationService = Depends(get_evaluation_service),
) -> EvaluationResponse:
    # parsed by hand so local and remote paths share one validator
    evaluation = parse_request(await request.body())
    response = await service.evaluate(evaluation)
    logger.debug(
        "request evaluated",
        request_id=response.request_id,
        status=response.status.value,
        compute_ms=response.compute_ms,
    )
    return response
