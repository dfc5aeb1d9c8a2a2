"""Stage 3: rewrite a toxic comment into a civil, semantics-preserving one.

Every candidate rewrite is verified before it is returned: the stage-1
filter must judge it non-toxic (a real-time tool must not suggest text it
would itself flag), code spans from the original must survive verbatim,
and content similarity and fluency are scored. Failed attempts trigger a
retry with an escalated instruction, up to the configured attempt budget;
the best attempt wins by (accepted, similarity) lexicographic order.

``build_parallel_corpus`` drives the same loop over a whole toxic set with
a teacher backend, writing accepted pairs, a rejects log, and a checkpoint
file that makes interrupted runs resumable without repeating teacher calls.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .backends.base import ChatMessage, DecodingParams, Registry, Role
from .coach import load_template
from .errors import BackendError, PreconditionError, StageError
from .filtering import FilterConfig, classify, classify_text
from .records import CategoryAssignment, CommentRecord, Label, RewriteResult
from .scorers import (
    ContentScorer,
    FluencyScorer,
    bag_cosine_similarity,
    rule_based_fluency,
)
from .textnorm import extract_code_spans

logger = logging.getLogger(__name__)

ESCALATION_INSTRUCTION = (
    "That rewrite would still be flagged as hostile. Produce a new version "
    "with every charged or demeaning word removed, keeping the technical "
    "content unchanged. Reply in the same format, ending with the rewrite "
    "wrapped in <rewrite> tags."
)


@dataclass(frozen=True)
class ParallelPair:
    pair_id: str
    source: str
    target: str
    teacher_backend_id: str
    generation_params: DecodingParams

    def __post_init__(self) -> None:
        if not self.source.strip() or not self.target.strip():
            raise ValueError("source and target must be non-empty")
        if self.source == self.target:
            raise ValueError(f"pair {self.pair_id}: target equals source")


@dataclass(frozen=True)
class ReframeConfig:
    backend_id: str = "reframer"
    max_attempts: int = 3
    fluency_threshold: float = 0.0
    similarity_threshold: float = 0.0
    verification_filter: FilterConfig = field(default_factory=FilterConfig)
    preserve_code: bool = True
    template: str = "reframe_v1"

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        for name in ("fluency_threshold", "similarity_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} {value} outside [0, 1]")


def build_reframe_prompt(
    comment: CommentRecord,
    assignment: Optional[CategoryAssignment] = None,
    *,
    template: str = "reframe_v1",
    template_dir: Optional[Path] = None,
) -> list[ChatMessage]:
    """Render the rewrite prompt; deterministic in its inputs."""
    guidance_lines = []
    if assignment is not None and assignment.categories:
        names = ", ".join(sorted(assignment.categories))
        guidance_lines.append(
            f"The comment was flagged for: {names}. Target those problems directly."
        )
    if extract_code_spans(comment.body):
        guidance_lines.append(
            "The comment contains backtick code spans; reproduce each one "
            "verbatim, character for character."
        )
    guidance = "\n".join(guidance_lines)
    text = load_template(template, template_dir)
    rendered = text.replace("{{guidance}}", guidance).replace("{{comment}}", comment.body)
    return [ChatMessage(Role.USER, rendered)]


_REWRITE_OPEN = "<rewrite>"
_REWRITE_CLOSE = "</rewrite>"


def extract_rewrite(raw: str) -> tuple[str, str]:
    """Split a model reply into (rationale, rewrite).

    The rewrite is the last <rewrite>...</rewrite> block; without one, the
    whole trimmed reply is taken as the rewrite with an empty rationale.
    """
    end = raw.rfind(_REWRITE_CLOSE)
    start = raw.rfind(_REWRITE_OPEN, 0, end if end != -1 else None)
    if start == -1 or end == -1 or end < start:
        return "", raw.strip()
    rationale = raw[:start].strip()
    rewrite = raw[start + len(_REWRITE_OPEN):end].strip()
    return rationale, rewrite


def code_spans_preserved(original: str, rewritten: str) -> bool:
    """Every code span of the original appears verbatim in the rewrite."""
    return all(span in rewritten for span in extract_code_spans(original))


def verify_rewrite(
    original: str,
    rewritten: str,
    cfg: ReframeConfig,
    registry: Registry,
    *,
    content_scorer: Optional[ContentScorer] = None,
    fluency_scorer: Optional[FluencyScorer] = None,
) -> tuple[bool, float, float]:
    """(style_pass, fluency, similarity) for a candidate rewrite."""
    if not original.strip() or not rewritten.strip():
        raise ValueError("original and rewritten must be non-empty")
    content_scorer = content_scorer or bag_cosine_similarity
    fluency_scorer = fluency_scorer or rule_based_fluency
    verdict = classify_text(rewritten, cfg.verification_filter, registry)
    style_pass = verdict.label is Label.NON_TOXIC
    fluency = min(1.0, max(0.0, fluency_scorer(rewritten)))
    similarity = min(1.0, max(0.0, content_scorer(original, rewritten)))
    return style_pass, fluency, similarity


def reframe(
    comment: CommentRecord,
    assignment: Optional[CategoryAssignment],
    cfg: ReframeConfig,
    registry: Registry,
    *,
    skip_precheck: bool = False,
    template_dir: Optional[Path] = None,
    content_scorer: Optional[ContentScorer] = None,
    fluency_scorer: Optional[FluencyScorer] = None,
) -> RewriteResult:
    """Generate, verify, and select the best civil rewrite.

    ``skip_precheck`` lets the gateway, which has already run stage 1,
    avoid a duplicate filter call; standalone callers keep the guard.
    """
    if not skip_precheck:
        verdict = classify(comment, cfg.verification_filter, registry)
        if verdict.label is Label.NON_TOXIC:
            raise PreconditionError(
                f"comment {comment.id!r} is not toxic under the verification filter"
            )
    backend = registry.completion(cfg.backend_id)
    params = DecodingParams(temperature=0.0)
    messages = build_reframe_prompt(comment, assignment, template=cfg.template, template_dir=template_dir)

    best: Optional[RewriteResult] = None
    attempts = 0
    for attempt in range(1, cfg.max_attempts + 1):
        attempts = attempt
        try:
            raw = backend.complete(messages, params)
        except BackendError as exc:
            raise StageError("reframer", exc) from exc
        rationale, rewritten = extract_rewrite(raw)
        if rewritten.strip():
            style_pass, fluency, similarity = verify_rewrite(
                comment.body,
                rewritten,
                cfg,
                registry,
                content_scorer=content_scorer,
                fluency_scorer=fluency_scorer,
            )
            preserved = (
                code_spans_preserved(comment.body, rewritten) if cfg.preserve_code else True
            )
            candidate = RewriteResult(
                original=comment.body,
                rewritten=rewritten,
                rationale=rationale,
                style_pass=style_pass,
                fluency_score=fluency,
                content_similarity=similarity,
                attempts=attempt,
                code_preserved=preserved,
            )
            if best is None or _rank(candidate) > _rank(best):
                best = candidate
            if candidate.accepted:
                break
        messages = messages + [
            ChatMessage(Role.ASSISTANT, raw if raw.strip() else "(empty reply)"),
            ChatMessage(Role.USER, ESCALATION_INSTRUCTION),
        ]
    if best is None:
        raise StageError(
            "reframer",
            BackendError(
                f"backend {cfg.backend_id!r} produced no usable rewrite in "
                f"{cfg.max_attempts} attempts",
                backend_id=cfg.backend_id,
            ),
        )
    if best.attempts != attempts:
        best = RewriteResult(
            original=best.original,
            rewritten=best.rewritten,
            rationale=best.rationale,
            style_pass=best.style_pass,
            fluency_score=best.fluency_score,
            content_similarity=best.content_similarity,
            attempts=attempts,
            code_preserved=best.code_preserved,
        )
    return best


def _rank(result: RewriteResult) -> tuple[bool, bool, float]:
    return (result.accepted, result.style_pass, result.content_similarity)


# --- parallel corpus building ---------------------------------------------------

def _reject_reason(result: RewriteResult, cfg: ReframeConfig) -> Optional[str]:
    """Why a verified rewrite still fails the corpus acceptance gate."""
    if not result.style_pass:
        return "style"
    if not result.code_preserved:
        return "code"
    if result.content_similarity < cfg.similarity_threshold:
        return "similarity"
    if result.fluency_score < cfg.fluency_threshold:
        return "fluency"
    if result.rewritten == result.original:
        return "unchanged"
    return None


class CorpusCheckpoint:
    """Append-only journal of finished pair ids; absent path = no resume."""

    def __init__(self, path: Optional[Path]):
        self.path = path
        self.done: set[str] = set()
        if path is not None and path.exists():
            for line in path.read_text(encoding="utf-8").splitlines():
                line = line.strip()
                if line:
                    self.done.add(json.loads(line)["pair_id"])

    def mark(self, pair_id: str, status: str) -> None:
        self.done.add(pair_id)
        if self.path is not None:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({"pair_id": pair_id, "status": status}) + "\n")
                fh.flush()


def build_parallel_corpus(
    toxic_set: Sequence[CommentRecord],
    teacher_backend_id: str,
    cfg: ReframeConfig,
    registry: Registry,
    *,
    out_path: Optional[Path] = None,
    rejects_path: Optional[Path] = None,
    checkpoint_path: Optional[Path] = None,
    template_dir: Optional[Path] = None,
) -> list[ParallelPair]:
    """Rewrite every toxic comment with the teacher backend into a corpus.

    One pair per input that passes verification; rejects are logged with a
    reason. Per-item failures never abort the run; only a missing backend
    (unrecoverable config error) or an interrupt does. With a checkpoint
    path, finished items are skipped on rerun and previously accepted
    pairs are reloaded from ``out_path``.
    """
    registry.completion(teacher_backend_id)  # fail fast on config errors
    teacher_cfg = replace(cfg, backend_id=teacher_backend_id)
    checkpoint = CorpusCheckpoint(checkpoint_path)
    pairs: list[ParallelPair] = []
    if checkpoint.done and out_path is not None and out_path.exists():
        for line in out_path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                doc = json.loads(line)
                pairs.append(
                    ParallelPair(
                        pair_id=doc["pair_id"],
                        source=doc["source"],
                        target=doc["target"],
                        teacher_backend_id=doc["teacher_backend_id"],
                        generation_params=DecodingParams(**doc["params"]),
                    )
                )
    elif not checkpoint.done:
        # fresh run: stale outputs from a previous configuration would
        # otherwise accumulate duplicates
        for stale in (out_path, rejects_path):
            if stale is not None and stale.exists():
                stale.unlink()

    params = DecodingParams(temperature=0.0)
    for comment in toxic_set:
        pair_id = comment.id
        if pair_id in checkpoint.done:
            continue
        try:
            result = reframe(comment, None, teacher_cfg, registry, template_dir=template_dir)
        except PreconditionError:
            _log_reject(rejects_path, pair_id, "not_toxic", attempts=0)
            checkpoint.mark(pair_id, "rejected:not_toxic")
            continue
        except StageError as exc:
            logger.warning("corpus item %s failed: %s", pair_id, exc)
            _log_reject(rejects_path, pair_id, f"backend:{exc.cause}", attempts=0)
            checkpoint.mark(pair_id, "rejected:backend")
            continue
        reason = _reject_reason(result, teacher_cfg)
        if reason is not None:
            _log_reject(rejects_path, pair_id, reason, attempts=result.attempts)
            checkpoint.mark(pair_id, f"rejected:{reason}")
            continue
        pair = ParallelPair(
            pair_id=pair_id,
            source=comment.body,
            target=result.rewritten,
            teacher_backend_id=teacher_backend_id,
            generation_params=params,
        )
        pairs.append(pair)
        if out_path is not None:
            with out_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(pair_to_dict(pair), sort_keys=True) + "\n")
        checkpoint.mark(pair_id, "accepted")
    return pairs


def pair_to_dict(pair: ParallelPair) -> dict:
    return {
        "pair_id": pair.pair_id,
        "source": pair.source,
        "target": pair.target,
        "teacher_backend_id": pair.teacher_backend_id,
        "params": {
            "temperature": pair.generation_params.temperature,
            "max_tokens": pair.generation_params.max_tokens,
        },
    }


def _log_reject(path: Optional[Path], pair_id: str, reason: str, *, attempts: int) -> None:
    if path is None:
        return
    with path.open("a", encoding="utf-8") as fh:
        fh.write(
            json.dumps({"pair_id": pair_id, "reason": reason, "attempts": attempts}) + "\n"
        )
