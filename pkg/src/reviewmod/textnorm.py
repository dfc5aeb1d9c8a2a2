"""Text normalization shared by caching, classification, and metrics.

All comment text is normalized (NFC unicode, CRLF -> LF) before it is
hashed or classified, so cache keys and metric inputs are stable across
platforms and input encodings.
"""

from __future__ import annotations

import hashlib
import re
import unicodedata

# Fenced blocks first so their backticks are not eaten by the inline rule.
_FENCED_RE = re.compile(r"```.*?```", re.DOTALL)
_INLINE_RE = re.compile(r"`[^`\n]+`")

CODE_PLACEHOLDER = "[code]"


def normalize_text(text: str) -> str:
    """NFC-normalize and convert CRLF / lone CR line endings to LF."""
    text = unicodedata.normalize("NFC", text)
    return text.replace("\r\n", "\n").replace("\r", "\n")


def extract_code_spans(text: str) -> list[str]:
    """Return fenced blocks and inline code spans in document order."""
    spans: list[tuple[int, str]] = []
    remainder = text
    for match in _FENCED_RE.finditer(text):
        spans.append((match.start(), match.group(0)))
    remainder = _FENCED_RE.sub("", text)
    for match in _INLINE_RE.finditer(remainder):
        spans.append((match.start(), match.group(0)))
    return [s for _, s in sorted(spans, key=lambda pair: pair[0])]


def strip_code_spans(text: str) -> str:
    """Replace fenced blocks and inline code spans with a neutral token.

    Identifier-looking prose (snake_case names quoted with ' or ") is left
    alone on purpose: only backtick-delimited spans are author-marked code.
    """
    text = _FENCED_RE.sub(CODE_PLACEHOLDER, text)
    return _INLINE_RE.sub(CODE_PLACEHOLDER, text)


def remove_code_spans(text: str) -> str:
    """Drop code spans entirely (no placeholder); for bag-of-words scoring."""
    text = _FENCED_RE.sub(" ", text)
    return _INLINE_RE.sub(" ", text)


def comment_hash(text: str, *, salt: str = "") -> str:
    """256-bit hex digest of the normalized text (optionally salted).

    Used both as a privacy-preserving identifier in event logs and as the
    cache key component for moderation results.
    """
    payload = normalize_text(text)
    if salt:
        payload = payload + "\x00" + salt
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()
