"""Stage 2: multi-label sub-category classification with explanations.

Prompts follow a five-element protocol: role clarification, task
assignment, category definitions with examples, operational guidelines,
and a strict XML output specification. Templates are versioned data files
with ``{{comment}}``, ``{{definitions}}``, ``{{schema}}``, ``{{persona}}``
placeholders, selected by config.

The response parser never throws on malformed text: strict mode demands a
single well-formed ``<result>`` document; lenient mode falls back to
scanning for well-formed ``<category>`` elements. Unknown category names
are dropped with warnings, duplicates keep the first explanation, and the
non-toxic marker maps to an empty category set.
"""

from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .backends.base import ChatMessage, DecodingParams, Registry, Role
from .errors import BackendError, ConfigError, StageError
from .records import CategoryAssignment, CommentRecord, ParseStatus
from .taxonomy import Taxonomy, slugify

logger = logging.getLogger(__name__)

RESPONSE_SCHEMA = """<result>
  <category name="CATEGORY_ID">short explanation quoting the offending phrase</category>
  <!-- one element per applicable category; if none apply use exactly: -->
  <category name="{marker}">one sentence on why the comment is acceptable</category>
</result>"""

DEFAULT_PERSONA = (
    "a seasoned open-source maintainer who reviews code firmly but courteously"
)

CORRECTIVE_INSTRUCTION = (
    "Your previous reply did not match the required format. Respond again "
    "with exactly one XML document in this schema and no other text:\n{schema}"
)

PROTOCOL_ELEMENTS = (
    "role",
    "task",
    "categories",
    "guidelines",
    "output",
)

_SECTION_RE = re.compile(r"^# (\w+)$", re.MULTILINE)


class ParseMode(str, Enum):
    STRICT = "strict"
    LENIENT = "lenient"


@dataclass(frozen=True)
class CoachPrompt:
    messages: tuple[ChatMessage, ...]
    taxonomy_version: str
    protocol_elements: frozenset[str]

    def __post_init__(self) -> None:
        missing = set(PROTOCOL_ELEMENTS) - self.protocol_elements
        if missing:
            raise ValueError(f"prompt missing protocol elements: {sorted(missing)}")


@dataclass(frozen=True)
class CoachConfig:
    backend_id: str = "coach"
    template: str = "coach_v2"
    persona: str = DEFAULT_PERSONA
    mode: ParseMode = ParseMode.LENIENT


def load_template(name: str, search_dir: Optional[Path] = None) -> str:
    """Load a prompt template by name, from ``search_dir`` or bundled data."""
    if search_dir is not None:
        candidate = search_dir / f"{name}.txt"
        if candidate.is_file():
            return candidate.read_text(encoding="utf-8")
    try:
        return (
            resources.files("reviewmod.data.prompts").joinpath(f"{name}.txt").read_text("utf-8")
        )
    except FileNotFoundError:
        raise ConfigError(f"unknown prompt template {name!r}") from None


def response_schema(taxonomy: Taxonomy) -> str:
    return RESPONSE_SCHEMA.format(marker=taxonomy.marker.id)


def format_definitions(taxonomy: Taxonomy) -> str:
    blocks = []
    for category in taxonomy.categories:
        lines = [f"- {category.id} ({category.display_name}): {category.definition.strip()}"]
        for exemplar in category.exemplars:
            lines.append(f'  example: "{exemplar}"')
        blocks.append("\n".join(lines))
    return "\n".join(blocks)


def build_coach_prompt(
    comment: CommentRecord,
    taxonomy: Taxonomy,
    persona: str = DEFAULT_PERSONA,
    *,
    template: str = "coach_v2",
    template_dir: Optional[Path] = None,
) -> CoachPrompt:
    """Render the classification prompt; deterministic in its inputs."""
    if not persona.strip():
        raise ValueError("persona must be non-empty")
    text = load_template(template, template_dir)
    rendered = (
        text.replace("{{persona}}", persona.strip())
        .replace("{{definitions}}", format_definitions(taxonomy))
        .replace("{{schema}}", response_schema(taxonomy))
        .replace("{{comment}}", comment.body)
    )
    elements = frozenset(m.group(1) for m in _SECTION_RE.finditer(rendered))
    return CoachPrompt(
        messages=(ChatMessage(Role.USER, rendered),),
        taxonomy_version=taxonomy.version,
        protocol_elements=frozenset(PROTOCOL_ELEMENTS) & elements,
    )


# --- response parsing ----------------------------------------------------------

_CATEGORY_SCAN_RE = re.compile(
    r"<category\s+name\s*=\s*(\"[^\"]*\"|'[^']*')\s*>(.*?)</category\s*>",
    re.DOTALL | re.IGNORECASE,
)


def _strict_elements(raw: str) -> list[tuple[str, str]]:
    """Parse the full document; raises on any schema deviation."""
    root = ET.fromstring(raw.strip())
    if root.tag != "result":
        raise ValueError(f"root element is {root.tag!r}, expected 'result'")
    elements = []
    for child in root:
        if child.tag != "category":
            raise ValueError(f"unexpected element {child.tag!r}")
        name = child.get("name")
        if name is None:
            raise ValueError("category element without a name attribute")
        elements.append((name, (child.text or "").strip()))
    return elements


def _lenient_elements(raw: str) -> list[tuple[str, str]]:
    """Scan for individually well-formed category elements."""
    elements = []
    for match in _CATEGORY_SCAN_RE.finditer(raw):
        fragment = match.group(0)
        try:
            node = ET.fromstring(fragment)
            name = node.get("name") or ""
            text = (node.text or "").strip()
        except ET.ParseError:
            # bad entities inside an otherwise recognizable element
            name = match.group(1)[1:-1]
            text = re.sub(r"\s+", " ", match.group(2)).strip()
        elements.append((name, text))
    return elements


def _resolve(
    elements: list[tuple[str, str]], taxonomy: Taxonomy
) -> tuple[dict[str, str], list[str], bool]:
    """Map raw (name, explanation) pairs onto the taxonomy.

    Returns (explanations by category id, warnings, marker_seen). Unknown
    names are dropped with a warning; duplicates keep the first; a marker
    appearing alongside toxic categories is dropped as contradictory.
    """
    explanations: dict[str, str] = {}
    warnings: list[str] = []
    marker_seen = False
    marker_id = taxonomy.marker.id
    for name, text in elements:
        slug = slugify(name)
        if slug == marker_id:
            marker_seen = True
            continue
        if slug not in taxonomy.toxic_ids:
            warnings.append(f"unknown category {name!r} dropped")
            continue
        if slug in explanations:
            warnings.append(f"duplicate category {slug!r}; kept first explanation")
            continue
        explanations[slug] = text
    if marker_seen and explanations:
        warnings.append("non-toxic marker alongside toxic categories; marker dropped")
    return explanations, warnings, marker_seen


def parse_coach_response(
    raw: str, taxonomy: Taxonomy, mode: ParseMode = ParseMode.LENIENT
) -> CategoryAssignment:
    """Parse model output into a CategoryAssignment; total over text."""
    # strict pass first in both modes: a strict success must be identical
    # regardless of mode.
    strict_failure: Optional[str] = None
    try:
        elements = _strict_elements(raw)
        explanations, warnings, marker_seen = _resolve(elements, taxonomy)
        if not explanations and not marker_seen:
            strict_failure = "no valid category elements"
        elif any(w.startswith("unknown category") for w in warnings):
            # a closed vocabulary is part of the strict schema
            strict_failure = "unknown category name"
        elif marker_seen and explanations:
            strict_failure = "non-toxic marker contradicts toxic categories"
        else:
            return CategoryAssignment(
                categories=frozenset(explanations),
                explanations=explanations,
                raw_response=raw,
                parse_status=ParseStatus.STRICT_OK,
                warnings=tuple(warnings),
            )
    except (ET.ParseError, ValueError) as exc:
        strict_failure = str(exc)

    if mode is ParseMode.STRICT:
        return CategoryAssignment(
            categories=frozenset(),
            explanations={},
            raw_response=raw,
            parse_status=ParseStatus.FAILED,
            warnings=(f"strict parse failed: {strict_failure}",),
        )

    elements = _lenient_elements(raw)
    explanations, warnings, marker_seen = _resolve(elements, taxonomy)
    if explanations or marker_seen:
        return CategoryAssignment(
            categories=frozenset(explanations),
            explanations=explanations,
            raw_response=raw,
            parse_status=ParseStatus.LENIENT_RECOVERED,
            warnings=tuple(warnings),
        )
    return CategoryAssignment(
        categories=frozenset(),
        explanations={},
        raw_response=raw,
        parse_status=ParseStatus.FAILED,
        warnings=tuple(warnings) + (f"strict parse failed: {strict_failure}",),
    )


def categorize(
    comment: CommentRecord,
    taxonomy: Taxonomy,
    registry: Registry,
    cfg: CoachConfig = CoachConfig(),
    *,
    template_dir: Optional[Path] = None,
) -> CategoryAssignment:
    """Run the coach once, with a single corrective retry on parse failure.

    Callers (the gateway) are responsible for only sending comments the
    filter already judged toxic.
    """
    backend = registry.completion(cfg.backend_id)
    prompt = build_coach_prompt(
        comment, taxonomy, cfg.persona, template=cfg.template, template_dir=template_dir
    )
    params = DecodingParams(temperature=0.0)
    try:
        raw = backend.complete(prompt.messages, params)
    except BackendError as exc:
        raise StageError("coach", exc) from exc
    assignment = parse_coach_response(raw, taxonomy, cfg.mode)
    if assignment.parse_status is not ParseStatus.FAILED:
        return assignment

    corrective = CORRECTIVE_INSTRUCTION.format(schema=response_schema(taxonomy))
    retry_messages = prompt.messages + (
        ChatMessage(Role.ASSISTANT, raw or "(empty)"),
        ChatMessage(Role.USER, corrective),
    )
    try:
        raw_retry = backend.complete(retry_messages, params)
    except BackendError as exc:
        raise StageError("coach", exc) from exc
    retried = parse_coach_response(raw_retry, taxonomy, cfg.mode)
    return CategoryAssignment(
        categories=retried.categories,
        explanations=retried.explanations,
        raw_response=retried.raw_response,
        parse_status=retried.parse_status,
        warnings=assignment.warnings + retried.warnings,
        attempts=2,
    )
