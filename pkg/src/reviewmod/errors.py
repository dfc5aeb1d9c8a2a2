"""Exception hierarchy shared across the pipeline stages."""

from __future__ import annotations


class ReviewmodError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(ReviewmodError):
    """Malformed or inconsistent configuration (taxonomy, gateway, backends)."""


class TaxonomyError(ConfigError):
    """Taxonomy config violates a structural invariant."""


class BackendError(ReviewmodError):
    """A model backend call failed. ``kind`` discriminates the failure."""

    kind = "backend"

    def __init__(self, message: str, *, backend_id: str = ""):
        super().__init__(message)
        self.backend_id = backend_id


class BackendTimeout(BackendError):
    kind = "timeout"


class BackendTransportError(BackendError):
    kind = "transport"


class BackendHTTPError(BackendError):
    """Non-2xx response with the error payload attached."""

    kind = "http"

    def __init__(self, message: str, *, status_code: int, payload: str = "", backend_id: str = ""):
        super().__init__(message, backend_id=backend_id)
        self.status_code = status_code
        self.payload = payload


class RetryExhausted(BackendError):
    """Retry budget spent; ``last`` holds the final underlying error."""

    kind = "retry_exhausted"

    def __init__(self, message: str, *, attempts: int, last: BackendError, backend_id: str = ""):
        super().__init__(message, backend_id=backend_id)
        self.attempts = attempts
        self.last = last


class StageError(ReviewmodError):
    """A pipeline stage failed; carries the stage tag for error envelopes."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause

    @property
    def timed_out(self) -> bool:
        cause = self.cause
        if isinstance(cause, RetryExhausted):
            cause = cause.last
        return isinstance(cause, BackendTimeout)


class PreconditionError(ReviewmodError):
    """Operation invoked outside its contract (e.g. reframing non-toxic text)."""
