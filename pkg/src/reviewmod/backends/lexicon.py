"""Weighted-lexicon toxicity scorer.

A deterministic baseline classifier so the whole pipeline runs with no
external model. Matching is token-based after normalization; snake_case
identifiers are split so a hostile term embedded in a variable name still
matches (a deliberate, documented false-positive mode that backtick code
stripping upstream is designed to mitigate).

Score combination: ``1 - prod(1 - w_i)`` over the weights of matched
distinct terms. Zero on no match, monotone in matched terms, capped at 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import ConfigError
from ..textnorm import normalize_text

_TOKEN_RE = re.compile(r"[a-z0-9']+")


@dataclass(frozen=True)
class Lexicon:
    weights: dict[str, float]

    def __post_init__(self) -> None:
        if not self.weights:
            raise ConfigError("lexicon must contain at least one term")
        for term, weight in self.weights.items():
            if not 0.0 < weight <= 1.0:
                raise ConfigError(f"lexicon term {term!r}: weight {weight} outside (0, 1]")


def parse_lexicon(text: str) -> Lexicon:
    """Parse ``term weight`` lines; '#' starts a comment."""
    weights: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(f"lexicon line {lineno}: expected 'term weight', got {raw!r}")
        term, weight_text = parts
        try:
            weight = float(weight_text)
        except ValueError as exc:
            raise ConfigError(f"lexicon line {lineno}: bad weight {weight_text!r}") from exc
        weights[term.lower()] = weight
    return Lexicon(weights)


def load_lexicon(path: str | Path) -> Lexicon:
    return parse_lexicon(Path(path).read_text(encoding="utf-8"))


def default_lexicon() -> Lexicon:
    text = resources.files("reviewmod.data").joinpath("lexicon.txt").read_text("utf-8")
    return parse_lexicon(text)


def tokenize_for_matching(text: str) -> list[str]:
    """Lowercase tokens with underscores/hyphens treated as separators."""
    lowered = normalize_text(text).lower()
    return _TOKEN_RE.findall(lowered)


def classify_lexicon(text: str, lexicon: Lexicon) -> float:
    """Toxicity confidence in [0, 1] for ``text`` under ``lexicon``."""
    matched: set[str] = set()
    for token in tokenize_for_matching(text):
        if token in lexicon.weights:
            matched.add(token)
    survival = 1.0
    for term in matched:
        survival *= 1.0 - lexicon.weights[term]
    return min(1.0, max(0.0, 1.0 - survival))


class LexiconBackend:
    """Score backend wrapping a lexicon (registered by default as 'lexicon')."""

    def __init__(self, lexicon: Lexicon | None = None, backend_id: str = "lexicon"):
        self.backend_id = backend_id
        self.lexicon = lexicon or default_lexicon()

    def score(self, text: str) -> float:
        return classify_lexicon(text, self.lexicon)
