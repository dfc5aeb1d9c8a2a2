"""HTTP chat-completion client with bounded retry and concurrency capping.

Wire protocol is the common hosted-inference shape: POST a JSON body of
``{model, messages[], temperature, max_tokens[, stop]}``, read the first
choice's message content back. Auth is a bearer token read from the
environment variable named in the backend config.

Retry policy: exponential backoff starting at ``retry_base_ms`` with
factor 2 and full jitter, retrying only timeouts, transport failures,
HTTP 5xx, and 429. An admission gate bounds in-flight requests per
backend to ``max_concurrent_requests``.
"""

from __future__ import annotations

import logging
import os
import random
import time
from typing import Optional, Sequence

import httpx

from ..errors import (
    BackendError,
    BackendHTTPError,
    BackendTimeout,
    BackendTransportError,
    RetryExhausted,
)
from .base import AdmissionGate, BackendConfig, ChatMessage, DecodingParams

logger = logging.getLogger(__name__)

_RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class HttpCompletionBackend:
    def __init__(
        self,
        config: BackendConfig,
        *,
        transport: Optional[httpx.BaseTransport] = None,
        sleep=time.sleep,
        rng: Optional[random.Random] = None,
    ):
        self.config = config
        self.backend_id = config.backend_id
        self._gate = AdmissionGate(config.max_concurrent_requests)
        self._sleep = sleep
        self._rng = rng or random.Random()
        self._client = httpx.Client(
            timeout=config.timeout_ms / 1000.0,
            transport=transport,
        )

    def close(self) -> None:
        self._client.close()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.auth_env:
            token = os.environ.get(self.config.auth_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def _request_body(self, messages: Sequence[ChatMessage], params: DecodingParams) -> dict:
        body = {
            "model": self.config.model,
            "messages": [{"role": m.role.value, "content": m.content} for m in messages],
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        if params.stop_sequences:
            body["stop"] = list(params.stop_sequences)
        return body

    def _attempt(self, body: dict) -> str:
        try:
            response = self._client.post(
                self.config.endpoint, json=body, headers=self._headers()
            )
        except httpx.TimeoutException as exc:
            raise BackendTimeout(str(exc), backend_id=self.backend_id) from exc
        except httpx.TransportError as exc:
            raise BackendTransportError(str(exc), backend_id=self.backend_id) from exc
        if response.status_code // 100 != 2:
            raise BackendHTTPError(
                f"{self.config.endpoint} returned {response.status_code}",
                status_code=response.status_code,
                payload=response.text[:2000],
                backend_id=self.backend_id,
            )
        try:
            doc = response.json()
            return doc["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(
                f"unparseable completion payload from {self.backend_id}: {exc}",
                backend_id=self.backend_id,
            ) from exc

    @staticmethod
    def _retryable(error: BackendError) -> bool:
        if isinstance(error, (BackendTimeout, BackendTransportError)):
            return True
        return isinstance(error, BackendHTTPError) and error.status_code in _RETRYABLE_STATUS

    def complete(self, messages: Sequence[ChatMessage], params: DecodingParams) -> str:
        body = self._request_body(messages, params)
        attempts = self.config.max_retries + 1
        last: Optional[BackendError] = None
        with self._gate:
            for attempt in range(attempts):
                try:
                    return self._attempt(body)
                except BackendError as exc:
                    last = exc
                    if not self._retryable(exc) or attempt == attempts - 1:
                        break
                    delay_s = (self.config.retry_base_ms / 1000.0) * (2 ** attempt)
                    delay_s *= 0.5 + self._rng.random()  # full jitter in [0.5x, 1.5x)
                    logger.warning(
                        "backend %s attempt %d/%d failed (%s); retrying in %.3fs",
                        self.backend_id, attempt + 1, attempts, exc, delay_s,
                    )
                    self._sleep(delay_s)
        assert last is not None
        if self._retryable(last) and self.config.max_retries > 0:
            raise RetryExhausted(
                f"backend {self.backend_id} failed after {attempts} attempts: {last}",
                attempts=attempts,
                last=last,
                backend_id=self.backend_id,
            )
        raise last


class ScoreViaCompletion:
    """Adapter exposing a completion backend as a [0, 1] score backend.

    Asks for a single decimal score and parses the first float in the
    reply. Lets a hosted classifier stand behind the filter stage without
    a separate wire protocol.
    """

    PROMPT = (
        "Rate the toxicity of the following code-review comment on a scale "
        "from 0.0 (fully civil) to 1.0 (extremely toxic). Reply with the "
        "number only.\n\nComment:\n{text}"
    )

    def __init__(self, completion, backend_id: Optional[str] = None):
        self._completion = completion
        self.backend_id = backend_id or f"{completion.backend_id}-score"

    def score(self, text: str) -> float:
        from .base import Role

        reply = self._completion.complete(
            [ChatMessage(Role.USER, self.PROMPT.format(text=text))],
            DecodingParams(temperature=0.0, max_tokens=8),
        )
        import re

        match = re.search(r"\d+(?:\.\d+)?", reply)
        if not match:
            raise BackendError(
                f"score backend {self.backend_id}: no number in reply {reply!r}",
                backend_id=self.backend_id,
            )
        return min(1.0, max(0.0, float(match.group(0))))
