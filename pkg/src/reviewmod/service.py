"""Moderation pipeline assembly and the serving-side plumbing around it.

The pipeline composes the three stages (filter, categorize, reframe) with
the short-circuit rule: a non-toxic verdict ends processing. Around that
sits a TTL+LRU response cache keyed by content hash, an append-only event
log that stores hashes rather than raw text by default, and single-flight
deduplication so concurrent identical requests share one computation.
"""

from __future__ import annotations

import json
import os
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Mapping, Optional

import yaml

from .backends.base import BackendConfig, Registry
from .backends.http import HttpCompletionBackend
from .backends.lexicon import LexiconBackend, load_lexicon, default_lexicon
from .backends.mock import MockCompletionBackend, MockRule, MockScoreBackend
from .coach import CoachConfig, ParseMode, categorize
from .errors import ConfigError, StageError
from .filtering import FilterConfig, classify
from .records import (
    CommentRecord,
    Label,
    PipelineOutcome,
    outcome_to_dict,
)
from .reframer import ReframeConfig, reframe
from .scorers import content_scorer as lookup_content_scorer
from .scorers import fluency_scorer as lookup_fluency_scorer
from .taxonomy import Taxonomy, default_taxonomy, load_taxonomy_file
from .textnorm import comment_hash, normalize_text

PIPELINE_VERSION = "1.0.0"


class FeedbackAction(str, Enum):
    ACCEPTED_REWRITE = "accepted_rewrite"
    EDITED = "edited"
    DISMISSED = "dismissed"
    REPORTED_FALSE_POSITIVE = "reported_false_positive"


@dataclass(frozen=True)
class FeedbackRecord:
    comment_hash: str
    action: FeedbackAction
    context: str = ""

    def __post_init__(self) -> None:
        if not self.comment_hash:
            raise ValueError("comment_hash must be non-empty")


@dataclass(frozen=True)
class CacheConfig:
    max_entries: int = 10_000
    ttl_seconds: float = 24 * 3600.0

    def __post_init__(self) -> None:
        if self.max_entries < 1:
            raise ValueError("max_entries must be >= 1")
        if self.ttl_seconds <= 0:
            raise ValueError("ttl_seconds must be positive")


@dataclass(frozen=True)
class GatewayConfig:
    host: str = "127.0.0.1"
    port: int = 8710
    pipeline_version: str = PIPELINE_VERSION
    cache: CacheConfig = field(default_factory=CacheConfig)
    event_log_path: Optional[str] = None
    allowed_origins: tuple[str, ...] = ()
    auth_token: Optional[str] = None
    max_text_len: int = 20_000
    persist_text: bool = False
    filter: FilterConfig = field(default_factory=FilterConfig)
    coach: CoachConfig = field(default_factory=CoachConfig)
    reframe: ReframeConfig = field(default_factory=ReframeConfig)
    content_scorer: str = "bag_cosine"
    fluency_scorer: str = "rule_based"

    def __post_init__(self) -> None:
        if self.max_text_len < 1:
            raise ValueError("max_text_len must be >= 1")


class TtlLruCache:
    """Thread-safe cache bounded by entry count and age.

    Reads refresh recency (LRU); entries older than the TTL read as
    missing. Eviction happens on insert once the bound is exceeded.
    """

    def __init__(self, max_entries: int, ttl_seconds: float, clock: Callable[[], float] = time.monotonic) -> None:
        self._max = max_entries
        self._ttl = ttl_seconds
        self._clock = clock
        self._lock = threading.Lock()
        self._entries: OrderedDict[str, tuple[float, Any]] = OrderedDict()
        self.hits = 0
        self.misses = 0

    def get(self, key: str) -> Optional[Any]:
        with self._lock:
            item = self._entries.get(key)
            if item is None:
                self.misses += 1
                return None
            stored_at, value = item
            if self._clock() - stored_at > self._ttl:
                del self._entries[key]
                self.misses += 1
                return None
            self._entries.move_to_end(key)
            self.hits += 1
            return value

    def put(self, key: str, value: Any) -> None:
        with self._lock:
            self._entries[key] = (self._clock(), value)
            self._entries.move_to_end(key)
            while len(self._entries) > self._max:
                self._entries.popitem(last=False)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


class EventLog:
    """Append-only line-record log; one JSON object per event.

    Records content hashes, never raw text, unless persist_text is set.
    """

    def __init__(self, path: Optional[str | Path], persist_text: bool = False) -> None:
        self._path = Path(path) if path else None
        self._persist_text = persist_text
        self._lock = threading.Lock()
        if self._path is not None:
            self._path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, kind: str, payload: dict[str, Any]) -> None:
        if self._path is None:
            return
        record = {"ts": time.time(), "kind": kind, **payload}
        if not self._persist_text:
            record.pop("text", None)
        line = json.dumps(record, sort_keys=True)
        with self._lock:
            with self._path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")


class _Flight:
    __slots__ = ("event", "value", "error")

    def __init__(self) -> None:
        self.event = threading.Event()
        self.value: Any = None
        self.error: Optional[BaseException] = None


class SingleFlight:
    """Deduplicate concurrent calls that share a key.

    The first caller computes; others block on its event and receive the
    same result (or the same exception).
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._inflight: dict[str, _Flight] = {}

    def run(self, key: str, fn: Callable[[], Any]) -> tuple[Any, bool]:
        """Returns (result, shared) where shared means another caller computed it."""
        with self._lock:
            flight = self._inflight.get(key)
            if flight is None:
                flight = _Flight()
                self._inflight[key] = flight
                leader = True
            else:
                leader = False
        if not leader:
            flight.event.wait()
            if flight.error is not None:
                raise flight.error
            return flight.value, True
        try:
            flight.value = fn()
            return flight.value, False
        except BaseException as exc:
            flight.error = exc
            raise
        finally:
            with self._lock:
                self._inflight.pop(key, None)
            flight.event.set()


def moderation_cache_key(text: str, pipeline_version: str, want_rewrite: bool) -> str:
    """Content hash over normalized text, pipeline version, and rewrite flag.

    The flag is part of the key so a rewrite-bearing response is never
    served to a caller that asked for one and got a cached classify-only
    outcome.
    """
    base = comment_hash(normalize_text(text))
    return comment_hash(f"{base}\x1f{pipeline_version}\x1f{int(want_rewrite)}")


class ModerationPipeline:
    """Filter, categorize, and optionally reframe one comment."""

    def __init__(
        self,
        config: GatewayConfig,
        registry: Registry,
        taxonomy: Optional[Taxonomy] = None,
    ) -> None:
        self.config = config
        self.registry = registry
        self.taxonomy = taxonomy or default_taxonomy()
        self.content_scorer = lookup_content_scorer(config.content_scorer)
        self.fluency_scorer = lookup_fluency_scorer(config.fluency_scorer)

    def moderate(self, comment: CommentRecord, want_rewrite: bool = True) -> PipelineOutcome:
        timings: dict[str, int] = {}
        started = time.perf_counter()
        verdict = classify(comment, self.config.filter, self.registry)
        timings["filter"] = int((time.perf_counter() - started) * 1000)

        if verdict.label is Label.NON_TOXIC:
            return PipelineOutcome(
                comment_id=comment.id, verdict=verdict, stage_timings=timings
            )

        started = time.perf_counter()
        assignment = categorize(comment, self.taxonomy, self.registry, self.config.coach)
        timings["categorize"] = int((time.perf_counter() - started) * 1000)

        rewrite = None
        if want_rewrite:
            started = time.perf_counter()
            rewrite = reframe(
                comment,
                assignment,
                self.config.reframe,
                self.registry,
                skip_precheck=True,
                content_scorer=self.content_scorer,
                fluency_scorer=self.fluency_scorer,
            )
            timings["reframe"] = int((time.perf_counter() - started) * 1000)

        return PipelineOutcome(
            comment_id=comment.id,
            verdict=verdict,
            assignment=assignment,
            rewrite=rewrite,
            stage_timings=timings,
        )


class ModerationService:
    """Pipeline plus cache, event log, and single-flight request collapsing."""

    def __init__(
        self,
        pipeline: ModerationPipeline,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        self.pipeline = pipeline
        cfg = pipeline.config
        self.cache = TtlLruCache(cfg.cache.max_entries, cfg.cache.ttl_seconds, clock)
        self.events = EventLog(cfg.event_log_path, cfg.persist_text)
        self._flight = SingleFlight()

    @property
    def config(self) -> GatewayConfig:
        return self.pipeline.config

    def moderate_text(
        self, text: str, want_rewrite: bool = True, comment_id: str = "adhoc"
    ) -> tuple[dict[str, Any], bool]:
        """Returns (response document, cached flag)."""
        key = moderation_cache_key(text, self.config.pipeline_version, want_rewrite)
        text_hash = comment_hash(normalize_text(text))

        hit = self.cache.get(key)
        if hit is not None:
            doc = dict(hit)
            doc["comment_id"] = comment_id
            doc["comment_hash"] = text_hash
            self.events.append(
                "moderation",
                {"comment_hash": text_hash, "cached": True, "verdict": doc["verdict"]["label"], "text": text},
            )
            return doc, True

        def compute() -> dict[str, Any]:
            comment = CommentRecord(id=comment_id, body=text)
            outcome = self.pipeline.moderate(comment, want_rewrite=want_rewrite)
            doc = outcome_to_dict(outcome)
            doc["pipeline_version"] = self.config.pipeline_version
            self.cache.put(key, doc)
            return doc

        try:
            doc, shared = self._flight.run(key, compute)
        except StageError as exc:
            self.events.append(
                "moderation_error",
                {"comment_hash": text_hash, "stage": exc.stage, "error": str(exc), "text": text},
            )
            raise
        doc = dict(doc)
        doc["comment_id"] = comment_id
        # callers key their feedback on this hash, so it rides along
        doc["comment_hash"] = text_hash
        self.events.append(
            "moderation",
            {
                "comment_hash": text_hash,
                "cached": shared,
                "verdict": doc["verdict"]["label"],
                "text": text,
            },
        )
        return doc, shared

    def record_feedback(self, feedback: FeedbackRecord) -> None:
        self.events.append(
            "feedback",
            {
                "comment_hash": feedback.comment_hash,
                "action": feedback.action.value,
                "context": feedback.context,
            },
        )


def _build_backend(registry: Registry, doc: dict[str, Any]) -> None:
    kind = doc.get("kind")
    backend_id = doc.get("id")
    if not backend_id or not isinstance(backend_id, str):
        raise ConfigError("backend entry needs an id")
    if kind == "lexicon":
        lexicon = (
            load_lexicon(doc["lexicon_path"]) if doc.get("lexicon_path") else default_lexicon()
        )
        registry.register_score(LexiconBackend(backend_id=backend_id, lexicon=lexicon))
    elif kind == "mock-complete":
        rules = tuple(
            MockRule(contains=r["contains"], response=r["response"])
            for r in doc.get("rules", ())
        )
        canned = {}
        if doc.get("canned_file"):
            canned = json.loads(Path(doc["canned_file"]).read_text(encoding="utf-8"))
        registry.register_completion(
            MockCompletionBackend(
                backend_id=backend_id,
                canned={str(k): str(v) for k, v in canned.items()},
                rules=rules,
                default_response=doc.get("default_response"),
                call_log=doc.get("call_log"),
            )
        )
    elif kind == "mock-score":
        table = {str(k): float(v) for k, v in (doc.get("scores") or {}).items()}
        registry.register_score(
            MockScoreBackend(
                backend_id=backend_id,
                table=table,
                default=float(doc.get("default", 0.0)),
                call_log=doc.get("call_log"),
            )
        )
    elif kind == "http":
        cfg = BackendConfig(
            backend_id=backend_id,
            endpoint=doc["endpoint"],
            model=doc.get("model", ""),
            auth_env=doc.get("auth_env"),
            timeout_ms=int(doc.get("timeout_ms", 30_000)),
            max_retries=int(doc.get("max_retries", 3)),
            max_concurrent_requests=int(doc.get("max_concurrent_requests", 8)),
        )
        registry.register_completion(HttpCompletionBackend(cfg))
    else:
        raise ConfigError(f"unknown backend kind {kind!r}")


_ENV_OVERRIDES = {
    "REVIEWMOD_AUTH_TOKEN": ("auth_token", str),
    "REVIEWMOD_EVENT_LOG": ("event_log_path", str),
    "REVIEWMOD_MAX_TEXT_LEN": ("max_text_len", int),
}


def load_service_config(path: str | Path, env: Optional[Mapping[str, str]] = None):
    """Parse a YAML service config into (GatewayConfig, Registry, Taxonomy).

    Environment variables override file values: REVIEWMOD_AUTH_TOKEN,
    REVIEWMOD_EVENT_LOG, REVIEWMOD_MAX_TEXT_LEN.
    """
    env = dict(os.environ if env is None else env)
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("service config must be a mapping")

    registry = Registry()
    for backend_doc in doc.get("backends", ()):
        if not isinstance(backend_doc, dict):
            raise ConfigError("each backends entry must be a mapping")
        _build_backend(registry, backend_doc)

    taxonomy = (
        load_taxonomy_file(doc["taxonomy_path"])
        if doc.get("taxonomy_path")
        else default_taxonomy()
    )

    filter_doc = doc.get("filter") or {}
    filter_cfg = FilterConfig(
        backend_id=filter_doc.get("backend", "lexicon"),
        threshold=float(filter_doc.get("threshold", 0.5)),
        normalize_code_spans=bool(filter_doc.get("normalize_code_spans", True)),
    )

    coach_doc = doc.get("coach") or {}
    coach_cfg = CoachConfig(
        backend_id=coach_doc.get("backend", "coach"),
        template=coach_doc.get("template", "coach_v2"),
        persona=coach_doc.get("persona", CoachConfig().persona),
        mode=ParseMode(coach_doc.get("parse_mode", "lenient")),
    )

    reframe_doc = doc.get("reframe") or {}
    reframe_cfg = ReframeConfig(
        backend_id=reframe_doc.get("backend", "reframer"),
        max_attempts=int(reframe_doc.get("max_attempts", 3)),
        fluency_threshold=float(reframe_doc.get("fluency_threshold", 0.0)),
        similarity_threshold=float(reframe_doc.get("similarity_threshold", 0.0)),
        verification_filter=filter_cfg,
        template=reframe_doc.get("template", "reframe_v1"),
    )

    cache_doc = doc.get("cache") or {}
    cache_cfg = CacheConfig(
        max_entries=int(cache_doc.get("max_entries", 10_000)),
        ttl_seconds=float(cache_doc.get("ttl_seconds", 24 * 3600)),
    )

    gateway = GatewayConfig(
        host=str(doc.get("host", "127.0.0.1")),
        port=int(doc.get("port", 8710)),
        pipeline_version=str(doc.get("pipeline_version", PIPELINE_VERSION)),
        cache=cache_cfg,
        event_log_path=doc.get("event_log"),
        allowed_origins=tuple(doc.get("allowed_origins", ())),
        auth_token=doc.get("auth_token"),
        max_text_len=int(doc.get("max_text_len", 20_000)),
        persist_text=bool(doc.get("persist_text", False)),
        filter=filter_cfg,
        coach=coach_cfg,
        reframe=reframe_cfg,
        content_scorer=doc.get("content_scorer", "bag_cosine"),
        fluency_scorer=doc.get("fluency_scorer", "rule_based"),
    )

    for env_name, (attr, cast) in _ENV_OVERRIDES.items():
        if env_name in env and env[env_name]:
            gateway = replace(gateway, **{attr: cast(env[env_name])})

    return gateway, registry, taxonomy


def build_service(
    config: GatewayConfig, registry: Registry, taxonomy: Optional[Taxonomy] = None
) -> ModerationService:
    return ModerationService(ModerationPipeline(config, registry, taxonomy))
