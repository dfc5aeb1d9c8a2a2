"""HTTP surface of the moderation service.

Every response uses the envelope {ok, data | error{code, stage, message}}.
Status mapping: 400 malformed request, 401 bad token, 413 over the text
length bound, 502 backend failure (with the failing stage tagged), 504
stage timeout. Cross-origin access is limited to the configured origins.
"""

from __future__ import annotations

from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import PreconditionError, StageError
from .records import CommentRecord, Label, outcome_to_dict
from .service import FeedbackAction, FeedbackRecord, ModerationService
from .filtering import classify
from .coach import categorize
from .reframer import reframe
from .textnorm import comment_hash, normalize_text


class ModerateBody(BaseModel):
    text: str = Field(min_length=1)
    comment_id: Optional[str] = None
    context: Optional[str] = None
    want_rewrite: bool = True


class ClassifyBody(BaseModel):
    text: str = Field(min_length=1)


class FeedbackBody(BaseModel):
    comment_hash: str = Field(min_length=1)
    action: str
    note: Optional[str] = None


def _ok(data: Any, status_code: int = 200) -> JSONResponse:
    return JSONResponse({"ok": True, "data": data}, status_code=status_code)


def _err(status_code: int, code: str, message: str, stage: Optional[str] = None) -> JSONResponse:
    return JSONResponse(
        {"ok": False, "error": {"code": code, "stage": stage, "message": message}},
        status_code=status_code,
    )


def _stage_error_response(exc: StageError) -> JSONResponse:
    if exc.timed_out:
        return _err(504, "stage_timeout", str(exc), stage=exc.stage)
    return _err(502, "backend_failure", str(exc), stage=exc.stage)


def create_app(service: ModerationService) -> FastAPI:
    app = FastAPI(title="reviewmod gateway", docs_url=None, redoc_url=None)
    config = service.config

    if config.allowed_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.allowed_origins),
            allow_methods=["GET", "POST"],
            allow_headers=["Authorization", "Content-Type"],
        )

    @app.exception_handler(RequestValidationError)
    async def _on_validation(request: Request, exc: RequestValidationError) -> JSONResponse:
        return _err(400, "malformed_request", str(exc.errors()[:3]))

    def _auth_failure(request: Request) -> Optional[JSONResponse]:
        if config.auth_token is None:
            return None
        supplied = request.headers.get("authorization", "")
        if supplied == f"Bearer {config.auth_token}":
            return None
        return _err(401, "bad_token", "missing or invalid bearer token")

    def _length_failure(text: str) -> Optional[JSONResponse]:
        if len(text) > config.max_text_len:
            return _err(
                413,
                "text_too_long",
                f"text of {len(text)} chars exceeds limit {config.max_text_len}",
            )
        return None

    @app.post("/v1/moderate")
    async def moderate(body: ModerateBody, request: Request) -> JSONResponse:
        denied = _auth_failure(request) or _length_failure(body.text)
        if denied is not None:
            return denied
        try:
            doc, cached = service.moderate_text(
                body.text,
                want_rewrite=body.want_rewrite,
                comment_id=body.comment_id or "adhoc",
            )
        except StageError as exc:
            return _stage_error_response(exc)
        payload = dict(doc)
        payload["cached"] = cached
        return _ok(payload)

    @app.post("/v1/classify")
    async def classify_endpoint(body: ClassifyBody, request: Request) -> JSONResponse:
        denied = _auth_failure(request) or _length_failure(body.text)
        if denied is not None:
            return denied
        comment = CommentRecord(id="adhoc", body=body.text)
        try:
            verdict = classify(comment, config.filter, service.pipeline.registry)
        except StageError as exc:
            return _stage_error_response(exc)
        service.events.append(
            "classify",
            {
                "comment_hash": comment_hash(normalize_text(body.text)),
                "verdict": verdict.label.value,
                "text": body.text,
            },
        )
        return _ok(
            {
                "label": verdict.label.value,
                "confidence": verdict.confidence,
                "threshold": verdict.threshold,
            }
        )

    @app.post("/v1/reframe")
    async def reframe_endpoint(body: ClassifyBody, request: Request) -> JSONResponse:
        denied = _auth_failure(request) or _length_failure(body.text)
        if denied is not None:
            return denied
        comment = CommentRecord(id="adhoc", body=body.text)
        pipeline = service.pipeline
        try:
            verdict = classify(comment, config.filter, pipeline.registry)
            if verdict.label is not Label.TOXIC:
                return _err(
                    400, "precondition_failed", "text was not judged toxic; nothing to rewrite"
                )
            assignment = categorize(comment, pipeline.taxonomy, pipeline.registry, config.coach)
            rewrite = reframe(
                comment,
                assignment,
                config.reframe,
                pipeline.registry,
                content_scorer=pipeline.content_scorer,
                fluency_scorer=pipeline.fluency_scorer,
                skip_precheck=True,
            )
        except PreconditionError as exc:
            return _err(400, "precondition_failed", str(exc))
        except StageError as exc:
            return _stage_error_response(exc)
        service.events.append(
            "reframe",
            {
                "comment_hash": comment_hash(normalize_text(body.text)),
                "accepted": rewrite.accepted,
                "text": body.text,
            },
        )
        return _ok(
            {
                "rewrite": rewrite.rewritten,
                "rationale": rewrite.rationale,
                "style_pass": rewrite.style_pass,
                "content_similarity": rewrite.content_similarity,
                "fluency": rewrite.fluency_score,
                "code_preserved": rewrite.code_preserved,
                "accepted": rewrite.accepted,
                "attempts": rewrite.attempts,
            }
        )

    @app.post("/v1/feedback")
    async def feedback(body: FeedbackBody, request: Request) -> JSONResponse:
        denied = _auth_failure(request)
        if denied is not None:
            return denied
        try:
            action = FeedbackAction(body.action)
        except ValueError:
            allowed = sorted(a.value for a in FeedbackAction)
            return _err(400, "malformed_request", f"action must be one of {allowed}")
        record = FeedbackRecord(
            comment_hash=body.comment_hash, action=action, context=body.note or ""
        )
        service.record_feedback(record)
        return _ok({"recorded": True})

    @app.get("/healthz")
    async def health(request: Request) -> JSONResponse:
        registry = service.pipeline.registry
        stages = {
            "filter": config.filter.backend_id,
            "categorize": config.coach.backend_id,
            "reframe": config.reframe.backend_id,
        }
        backends = registry.describe()
        known = set(backends.get("completion", ())) | set(backends.get("score", ()))
        stage_status = {
            stage: ("ok" if backend_id in known else "missing")
            for stage, backend_id in stages.items()
        }
        status = "ok" if all(v == "ok" for v in stage_status.values()) else "degraded"
        return _ok(
            {
                "status": status,
                "stages": stage_status,
                "pipeline_version": config.pipeline_version,
                "cache": {
                    "entries": len(service.cache),
                    "hits": service.cache.hits,
                    "misses": service.cache.misses,
                },
            }
        )

    return app
