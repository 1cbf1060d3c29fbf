"""FastAPI dependencies."""

from fastapi import Request

from src.services.evaluation import EvaluationService


def get_evaluation_service(request: Request) -> EvaluationService:
    return request.app.state.evaluation_service
