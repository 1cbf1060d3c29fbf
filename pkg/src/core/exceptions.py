"""Error hierarchy shared by the library, the server and the CLI."""

from typing import Optional


class MorphoneatError(Exception):
    """Base class for all errors raised by morphoneat."""


class ContractViolationError(MorphoneatError, ValueError):
    """A caller broke an operation's precondition."""


class MalformedGenomeError(MorphoneatError):
    """A genome cannot be evaluated (e.g. its enabled graph has a cycle)."""


class ConfigurationError(MorphoneatError):
    """A run configuration failed validation."""

    def __init__(self, message: str, *, line: Optional[int] = None):
        super().__init__(message)
        self.line = line


class InvalidRequestError(MorphoneatError):
    """An evaluation request is well-formed JSON but violates its schema."""

    status_code = 422


class MalformedPayloadError(MorphoneatError):
    """An evaluation request body is not decodable JSON."""

    status_code = 400


class ServiceOverloadedError(MorphoneatError):
    """The evaluation queue is full."""

    status_code = 503


class EvaluationAbortedError(MorphoneatError):
    """Too many evaluations failed; the run stopped."""

    def __init__(self, message: str, *, checkpoint: Optional[str] = None):
        super().__init__(message)
        self.checkpoint = checkpoint
