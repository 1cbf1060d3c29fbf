"""Evaluation server application factory."""

from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI, Request, status
from fastapi.responses import JSONResponse
from prometheus_client import make_asgi_app

from src.api import v1
from src.core.config import settings
from src.core.exceptions import InvalidRequestError, MalformedPayloadError, ServiceOverloadedError
from src.core.logging import ensure_logging, get_logger
from src.services.evaluation import EvaluationService

logger = get_logger(__name__)


def _error_handler(status_code: int):
    async def handler(request: Request, exc: Exception) -> JSONResponse:
        logger.info("request rejected", path=request.url.path, status=status_code, error=str(exc))
        return JSONResponse(status_code=status_code, content={"detail": str(exc)})

    return handler


def _init_error_reporting() -> None:
    if settings.SENTRY_DSN:
        import sentry_sdk

        sentry_sdk.init(dsn=settings.SENTRY_DSN, environment=settings.ENVIRONMENT, release=settings.APP_VERSION)


def create_app(
    worker_count: Optional[int] = None,
    *,
    executor_kind: Optional[str] = None,
    queue_factor: Optional[int] = None,
    server_id: Optional[str] = None,
) -> FastAPI:
    """Build an evaluation server; arguments default to the process settings.

    Also usable as ``uvicorn --factory src.main:create_app``.
    """
    ensure_logging()
    _init_error_reporting()
    service = EvaluationService(
        worker_count or settings.WORKER_COUNT,
        queue_factor=settings.QUEUE_FACTOR if queue_factor is None else queue_factor,
        executor_kind=executor_kind or settings.EXECUTOR_KIND,
        server_id=server_id or settings.SERVER_ID,
    )

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        logger.info(
            "evaluation server starting",
            version=settings.APP_VERSION,
            server_id=service.server_id,
            workers=service.worker_count,
            capacity=service.capacity,
        )
        yield
        service.shutdown(wait=True)
        logger.info("evaluation server stopped", server_id=service.server_id)

    app = FastAPI(
        title=settings.APP_NAME,
        description="Stateless evaluation server for voxel morphologies.",
        version=settings.APP_VERSION,
        docs_url="/docs",
        redoc_url="/redoc",
        openapi_url="/openapi.json",
        lifespan=lifespan,
    )
    app.state.evaluation_service = service

    app.add_exception_handler(MalformedPayloadError, _error_handler(status.HTTP_400_BAD_REQUEST))
    app.add_exception_handler(InvalidRequestError, _error_handler(status.HTTP_422_UNPROCESSABLE_ENTITY))
    app.add_exception_handler(ServiceOverloadedError, _error_handler(status.HTTP_503_SERVICE_UNAVAILABLE))

    if settings.PROMETHEUS_ENABLED:
        app.mount("/metrics", make_asgi_app())

    app.include_router(v1.router, prefix="/api/v1")

    @app.get("/", tags=["root"])
    async def root():
        return {
            "name": settings.APP_NAME,
            "version": settings.APP_VERSION,
            "server_id": service.server_id,
            "health": "/api/v1/health",
        }

    return app
