"""Core domain types flowing through the moderation pipeline.

Everything here is an immutable dataclass, safe to share across concurrent
request handlers. Construction validates the type's invariants and raises
``ValueError`` on violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Mapping, Optional


class Label(str, Enum):
    TOXIC = "toxic"
    NON_TOXIC = "non_toxic"


class ParseStatus(str, Enum):
    STRICT_OK = "strict_ok"
    LENIENT_RECOVERED = "lenient_recovered"
    FAILED = "failed"


@dataclass(frozen=True)
class CommentRecord:
    """One code-review comment plus optional provenance and thread context."""

    id: str
    body: str
    source: Optional[str] = None
    author: Optional[str] = None
    created_at: Optional[datetime] = None
    context: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("comment id must be non-empty")
        if not self.body.strip():
            raise ValueError(f"comment {self.id!r}: body is empty after trimming")


@dataclass(frozen=True)
class Verdict:
    """Binary toxic / non-toxic decision for one comment.

    For score-producing backends the threshold rule is ``toxic iff
    confidence >= threshold`` (boundary counts as toxic).
    """

    label: Label
    confidence: float
    threshold: float
    backend_id: str
    latency_ms: int = 0
    cached: bool = False

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold {self.threshold} outside [0, 1]")
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be non-negative")


@dataclass(frozen=True)
class CategoryAssignment:
    """Sub-category labels plus per-category explanations for a toxic comment.

    ``categories`` is empty either when the non-toxic marker was the sole
    parsed label or when ``parse_status`` is ``failed``; ``raw_response`` is
    always retained for auditability. ``warnings`` records dropped unknown
    or contradictory labels; ``attempts`` counts model calls (1 normally,
    2 after the corrective-retry path).
    """

    categories: frozenset[str]
    explanations: Mapping[str, str]
    raw_response: str
    parse_status: ParseStatus
    warnings: tuple[str, ...] = ()
    attempts: int = 1

    def __post_init__(self) -> None:
        if self.parse_status is ParseStatus.FAILED and self.categories:
            raise ValueError("failed parse must carry no categories")
        missing = self.categories - set(self.explanations)
        if missing:
            raise ValueError(f"categories without explanations: {sorted(missing)}")


@dataclass(frozen=True)
class RewriteResult:
    """A detoxified rewrite plus its verification outcome."""

    original: str
    rewritten: str
    rationale: str
    style_pass: bool
    fluency_score: float
    content_similarity: float
    attempts: int
    code_preserved: bool = True

    def __post_init__(self) -> None:
        if self.attempts < 1:
            raise ValueError("attempts must be >= 1")
        for name in ("fluency_score", "content_similarity"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} {value} outside [0, 1]")

    @property
    def accepted(self) -> bool:
        return self.style_pass and self.code_preserved


@dataclass(frozen=True)
class PipelineOutcome:
    """Result of running one comment through the full pipeline.

    Invariant: a non-toxic verdict short-circuits the pipeline, so
    ``assignment`` and ``rewrite`` must be absent in that case.
    """

    comment_id: str
    verdict: Verdict
    assignment: Optional[CategoryAssignment] = None
    rewrite: Optional[RewriteResult] = None
    stage_timings: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.verdict.label is Label.NON_TOXIC and (
            self.assignment is not None or self.rewrite is not None
        ):
            raise ValueError("non-toxic verdict must not carry assignment or rewrite")


def outcome_to_dict(outcome: PipelineOutcome) -> dict[str, Any]:
    """JSON-ready dict for an outcome; stable field set, enums as strings."""
    verdict = outcome.verdict
    doc: dict[str, Any] = {
        "comment_id": outcome.comment_id,
        "verdict": {
            "label": verdict.label.value,
            "confidence": verdict.confidence,
            "threshold": verdict.threshold,
            "backend_id": verdict.backend_id,
            "latency_ms": verdict.latency_ms,
            "cached": verdict.cached,
        },
        "assignment": None,
        "rewrite": None,
        "stage_timings": dict(outcome.stage_timings),
    }
    if outcome.assignment is not None:
        a = outcome.assignment
        doc["assignment"] = {
            "categories": sorted(a.categories),
            "explanations": dict(sorted(a.explanations.items())),
            "parse_status": a.parse_status.value,
            "warnings": list(a.warnings),
            "attempts": a.attempts,
            "raw_response": a.raw_response,
        }
    if outcome.rewrite is not None:
        r = outcome.rewrite
        doc["rewrite"] = {
            "original": r.original,
            "rewritten": r.rewritten,
            "rationale": r.rationale,
            "style_pass": r.style_pass,
            "fluency_score": r.fluency_score,
            "content_similarity": r.content_similarity,
            "attempts": r.attempts,
            "code_preserved": r.code_preserved,
        }
    return doc
