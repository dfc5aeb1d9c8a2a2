"""Stage 1: binary toxic / non-toxic gate over a comment.

The decision rule is ``toxic iff confidence >= threshold`` (boundary counts
as toxic). Fenced blocks and inline code spans are replaced by a neutral
token before scoring by default; hostile-looking identifiers inside
backticks are author-marked code, the documented false-positive mode.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from .backends.base import Registry
from .errors import BackendError, StageError
from .records import CommentRecord, Label, Verdict
from .textnorm import normalize_text, strip_code_spans


@dataclass(frozen=True)
class FilterConfig:
    backend_id: str = "lexicon"
    threshold: float = 0.5
    normalize_code_spans: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold {self.threshold} outside [0, 1]")


def _prepared_body(comment: CommentRecord, cfg: FilterConfig) -> str:
    body = normalize_text(comment.body)
    if cfg.normalize_code_spans:
        body = strip_code_spans(body)
    return body


def classify(comment: CommentRecord, cfg: FilterConfig, registry: Registry) -> Verdict:
    """Score the comment with the configured backend and apply the threshold."""
    backend = registry.scorer(cfg.backend_id)
    started = time.monotonic()
    try:
        confidence = backend.score(_prepared_body(comment, cfg))
    except BackendError as exc:
        raise StageError("filter", exc) from exc
    latency_ms = int((time.monotonic() - started) * 1000)
    confidence = min(1.0, max(0.0, float(confidence)))
    label = Label.TOXIC if confidence >= cfg.threshold else Label.NON_TOXIC
    return Verdict(
        label=label,
        confidence=confidence,
        threshold=cfg.threshold,
        backend_id=cfg.backend_id,
        latency_ms=latency_ms,
    )


def classify_text(text: str, cfg: FilterConfig, registry: Registry) -> Verdict:
    """Convenience wrapper for callers holding bare text (rewrite checks)."""
    return classify(CommentRecord(id="adhoc", body=text), cfg, registry)


def _toxic_f1(scores: list[tuple[float, Label]], threshold: float) -> float:
    tp = sum(1 for s, gold in scores if s >= threshold and gold is Label.TOXIC)
    fp = sum(1 for s, gold in scores if s >= threshold and gold is Label.NON_TOXIC)
    fn = sum(1 for s, gold in scores if s < threshold and gold is Label.TOXIC)
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def calibrate_threshold(
    labeled: list[tuple[CommentRecord, Label]],
    cfg: FilterConfig,
    registry: Registry,
    grid_step: float = 0.05,
) -> float:
    """Grid-sweep the decision threshold, maximizing toxic-class F1.

    Ties break toward the larger threshold (prefer precision at equal F1).
    Each comment is scored once; the sweep reuses the scores.
    """
    if not 0.0 < grid_step <= 0.5:
        raise ValueError("grid_step must be in (0, 0.5]")
    gold_labels = {gold for _, gold in labeled}
    if gold_labels != {Label.TOXIC, Label.NON_TOXIC}:
        raise ValueError("calibration needs both toxic and non-toxic examples")
    backend = registry.scorer(cfg.backend_id)
    scores = [
        (min(1.0, max(0.0, backend.score(_prepared_body(comment, cfg)))), gold)
        for comment, gold in labeled
    ]
    steps = int(round(1.0 / grid_step))
    grid = [min(1.0, round(i * grid_step, 12)) for i in range(steps + 1)]
    return max(grid, key=lambda t: (_toxic_f1(scores, t), t))
