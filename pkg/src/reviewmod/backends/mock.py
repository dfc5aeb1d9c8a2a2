"""Deterministic mock backends for tests and offline demos.

``MockCompletionBackend`` answers from, in priority order: a scripted
response sequence (consumed once, for retry-flow tests), a canned table
keyed by prompt fingerprint, substring rules, then a default response.
Every call is counted and optionally appended to a call-log file so
out-of-process runs (CLI invocations) remain instrumentable.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from ..errors import BackendError
from ..textnorm import normalize_text
from .base import ChatMessage, DecodingParams, prompt_fingerprint


@dataclass(frozen=True)
class MockRule:
    contains: str
    response: str


class MockCompletionBackend:
    def __init__(
        self,
        backend_id: str = "mock",
        *,
        canned: Optional[dict[str, str]] = None,
        rules: Optional[Sequence[MockRule]] = None,
        script: Optional[Sequence[str]] = None,
        default_response: Optional[str] = None,
        call_log: Optional[str | Path] = None,
    ):
        self.backend_id = backend_id
        self.canned = dict(canned or {})
        self.rules = list(rules or [])
        self._script = list(script or [])
        self.default_response = default_response
        self.call_log = Path(call_log) if call_log else None
        self.calls = 0
        self._lock = threading.Lock()

    @classmethod
    def from_canned_file(cls, path: str | Path, backend_id: str = "mock", **kwargs) -> "MockCompletionBackend":
        """Load a canned-response table mapping prompt-hash -> response text."""
        table = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(backend_id, canned={str(k): str(v) for k, v in table.items()}, **kwargs)

    def complete(self, messages: Sequence[ChatMessage], params: DecodingParams) -> str:
        prompt_text = "\n".join(m.content for m in messages)
        with self._lock:
            self.calls += 1
            if self.call_log is not None:
                with self.call_log.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"backend": self.backend_id, "call": self.calls}) + "\n")
            if self._script:
                return self._script.pop(0)
        fingerprint = prompt_fingerprint(messages)
        if fingerprint in self.canned:
            return self.canned[fingerprint]
        for rule in self.rules:
            if rule.contains in prompt_text:
                return rule.response
        if self.default_response is not None:
            return self.default_response
        raise BackendError(
            f"mock backend {self.backend_id!r} has no response for prompt {fingerprint[:12]}",
            backend_id=self.backend_id,
        )


class MockScoreBackend:
    """Score backend answering from a normalized-text table (default 0.0)."""

    def __init__(
        self,
        backend_id: str = "mock-score",
        *,
        table: Optional[dict[str, float]] = None,
        default: float = 0.0,
        call_log: Optional[str | Path] = None,
    ):
        self.backend_id = backend_id
        self.table = {normalize_text(k): float(v) for k, v in (table or {}).items()}
        self.default = float(default)
        self.call_log = Path(call_log) if call_log else None
        self.calls = 0
        self._lock = threading.Lock()

    def score(self, text: str) -> float:
        with self._lock:
            self.calls += 1
            if self.call_log is not None:
                with self.call_log.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps({"backend": self.backend_id, "call": self.calls}) + "\n")
        return self.table.get(normalize_text(text), self.default)
