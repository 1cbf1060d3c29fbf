"""Application configuration."""

import os
import socket
from typing import Optional, Tuple

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


def _default_worker_count() -> int:
    return os.cpu_count() or 1


class Settings(BaseSettings):
    """Process-wide settings for the CLI, the evaluation server and its clients."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # Application
    APP_NAME: str = "morphoneat"
    APP_VERSION: str = "0.1.0"
    DEBUG: bool = False
    ENVIRONMENT: str = Field("development", pattern="^(development|staging|production)$")
    LOG_LEVEL: str = Field("INFO", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")

    # Evaluation server
    BIND_ADDRESS: str = "0.0.0.0:8000"
    WORKER_COUNT: int = Field(default_factory=_default_worker_count, ge=1)
    QUEUE_FACTOR: int = Field(4, ge=0)
    EXECUTOR_KIND: str = Field("process", pattern="^(process|thread)$")
    SERVER_ID: str = Field(default_factory=socket.gethostname)
    GRACEFUL_SHUTDOWN_SECONDS: int = 300

    # Evaluation client
    CLIENT_TIMEOUT_SECONDS: float = 120.0
    CLIENT_RETRY_LIMIT: int = 3

    # Artifacts
    OUTPUT_DIR: str = "runs"

    # Monitoring
    SENTRY_DSN: Optional[str] = None
    PROMETHEUS_ENABLED: bool = True

    @field_validator("BIND_ADDRESS")
    @classmethod
    def check_bind_address(cls, v: str) -> str:
        """Require ``host:port``."""
        parse_bind_address(v)
        return v

    @property
    def bind(self) -> Tuple[str, int]:
        return parse_bind_address(self.BIND_ADDRESS)


def parse_bind_address(value: str) -> Tuple[str, int]:
    """Split ``host:port`` into its parts."""
    host, sep, port = value.rpartition(":")
    if not sep or not host or not port.isdigit():
        raise ValueError(f"bind address must look like host:port, got {value!r}")
    return host, int(port)


settings = Settings()
