"""Logging configuration.

Everything logs through structlog to stderr so command output on stdout stays
machine-readable. Run-wide fields (algorithm, seed, server id) are bound once with
``bind_run_context`` and appear on every event after that.
"""

import logging
import sys
from typing import Any, Optional

import structlog
from structlog.stdlib import LoggerFactory

from src.core.config import settings

NOISY_LOGGERS = ("httpx", "httpcore", "uvicorn.access")


def setup_logging(level: Optional[str] = None, *, json_output: Optional[bool] = None) -> None:
    """Configure structured logging; ``json_output`` defaults to production-only JSON."""
    level_name = (level or settings.LOG_LEVEL).upper()
    if json_output is None:
        json_output = settings.ENVIRONMENT == "production"

    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level_name),
        force=True,
    )
    for name in NOISY_LOGGERS:
        logging.getLogger(name).setLevel(max(logging.WARNING, getattr(logging, level_name)))

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            structlog.processors.dict_tracebacks,
            structlog.processors.JSONRenderer() if json_output else structlog.dev.ConsoleRenderer(),
        ],
        context_class=dict,
        logger_factory=LoggerFactory(),
        cache_logger_on_first_use=True,
    )


def ensure_logging() -> None:
    """Configure logging with the process settings unless a caller already did."""
    if not structlog.is_configured():
        setup_logging()


def verbosity_level(verbose: int, quiet: bool = False) -> str:
    """Map ``-v`` counts onto a level name, starting from the configured level."""
    if quiet:
        return "WARNING"
    if verbose >= 1:
        return "DEBUG"
    return settings.LOG_LEVEL


def bind_run_context(**values: Any) -> None:
    """Attach fields to every subsequent log event in this context."""
    structlog.contextvars.bind_contextvars(**values)


def clear_run_context() -> None:
    structlog.contextvars.clear_contextvars()


def get_logger(name: str) -> structlog.BoundLogger:
    """Get a structured logger instance."""
    return structlog.get_logger(name)
