"""API v1 endpoints."""

from fastapi import APIRouter

from src.api import health
from src.api.v1 import evaluate

router = APIRouter()

router.include_router(health.router, tags=["health"])
router.include_router(evaluate.router, tags=["evaluation"])
