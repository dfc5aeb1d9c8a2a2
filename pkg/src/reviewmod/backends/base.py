"""Backend abstractions: message types, decoding params, and the registry.

Two backend flavors exist. Completion backends answer chat prompts (coach
and reframer stages); score backends map a text to a toxicity confidence
in [0, 1] (filter stage). Both are registered under a ``backend_id`` and
resolved through a :class:`Registry`.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Protocol, Sequence, runtime_checkable

from ..errors import ConfigError


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self) -> None:
        if self.role in (Role.SYSTEM, Role.USER) and not self.content.strip():
            raise ValueError(f"{self.role.value} message content must be non-empty")


@dataclass(frozen=True)
class DecodingParams:
    """Decoding controls; the default is deterministic (temperature 0)."""

    temperature: float = 0.0
    max_tokens: int = 1024
    stop_sequences: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class BackendConfig:
    """Connection settings for a remote completion backend."""

    backend_id: str
    endpoint: str
    model: str
    auth_env: Optional[str] = None
    timeout_ms: int = 30_000
    max_retries: int = 3
    max_concurrent_requests: int = 8
    retry_base_ms: int = 250

    def __post_init__(self) -> None:
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_concurrent_requests < 1:
            raise ValueError("max_concurrent_requests must be >= 1")


@runtime_checkable
class CompletionBackend(Protocol):
    backend_id: str

    def complete(self, messages: Sequence[ChatMessage], params: DecodingParams) -> str:
        ...


@runtime_checkable
class ScoreBackend(Protocol):
    backend_id: str

    def score(self, text: str) -> float:
        ...


def prompt_fingerprint(messages: Sequence[ChatMessage]) -> str:
    """Stable hash of a prompt; the key of canned mock-response tables."""
    hasher = hashlib.sha256()
    for message in messages:
        hasher.update(message.role.value.encode("utf-8"))
        hasher.update(b"\x1f")
        hasher.update(message.content.encode("utf-8"))
        hasher.update(b"\x1e")
    return hasher.hexdigest()


class Registry:
    """Thread-safe id -> backend lookup used by every stage."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._completion: dict[str, CompletionBackend] = {}
        self._score: dict[str, ScoreBackend] = {}

    def register_completion(self, backend: CompletionBackend) -> None:
        with self._lock:
            self._completion[backend.backend_id] = backend

    def register_score(self, backend: ScoreBackend) -> None:
        with self._lock:
            self._score[backend.backend_id] = backend

    def completion(self, backend_id: str) -> CompletionBackend:
        with self._lock:
            try:
                return self._completion[backend_id]
            except KeyError:
                raise ConfigError(f"no completion backend registered as {backend_id!r}") from None

    def scorer(self, backend_id: str) -> ScoreBackend:
        with self._lock:
            try:
                return self._score[backend_id]
            except KeyError:
                raise ConfigError(f"no score backend registered as {backend_id!r}") from None

    def describe(self) -> dict[str, list[str]]:
        with self._lock:
            return {
                "completion": sorted(self._completion),
                "score": sorted(self._score),
            }


@dataclass
class AdmissionGate:
    """Bounds in-flight requests per backend to ``max_concurrent_requests``."""

    limit: int
    _sem: threading.BoundedSemaphore = field(init=False)

    def __post_init__(self) -> None:
        self._sem = threading.BoundedSemaphore(self.limit)

    def __enter__(self) -> "AdmissionGate":
        self._sem.acquire()
        return self

    def __exit__(self, *exc_info: object) -> None:
        self._sem.release()
