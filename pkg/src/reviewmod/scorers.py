"""Pluggable content-preservation and fluency scorers.

Both built-ins are deterministic rule-based stand-ins for model-backed
scorers: good enough to exercise the metric stack and the rewrite
verification gate offline, not a measurement of linguistic quality.
A scorer is any callable with the matching signature, so model-backed
replacements plug in without touching the metric code.
"""

from __future__ import annotations

import re
from collections import Counter
from math import sqrt
from typing import Callable

from .textnorm import extract_code_spans, normalize_text, remove_code_spans, strip_code_spans

ContentScorer = Callable[[str, str], float]
FluencyScorer = Callable[[str], float]


class _ScorerRegistry:
    def __init__(self) -> None:
        self.content: dict[str, ContentScorer] = {}
        self.fluency: dict[str, FluencyScorer] = {}


_registry = _ScorerRegistry()

_STOP_WORDS = frozenset(
    """
    a an and are as at be but by for from has have i if in into is it its
    me my of on or our so that the their them these they this to was we
    were what which who will with you your
    """.split()
)

_WORD_RE = re.compile(r"[a-z0-9_]+")


def _bag_of_words(text: str) -> Counter:
    """Lowercased word counts, stop words removed, code spans kept whole."""
    text = normalize_text(text)
    bag: Counter = Counter()
    for span in extract_code_spans(text):
        bag[" ".join(span.split())] += 1
    prose = remove_code_spans(text).lower()
    for token in _WORD_RE.findall(prose):
        if token not in _STOP_WORDS:
            bag[token] += 1
    return bag


def bag_cosine_similarity(original: str, rewritten: str) -> float:
    """Cosine over word-frequency vectors of the two texts.

    Texts whose content words are disjoint score 0; an identical rewrite
    scores 1. Two texts with no content words at all count as preserved
    only when they are equal after normalization.
    """
    a, b = _bag_of_words(original), _bag_of_words(rewritten)
    if not a and not b:
        return 1.0 if normalize_text(original) == normalize_text(rewritten) else 0.0
    if not a or not b:
        return 0.0
    dot = sum(count * b[token] for token, count in a.items())
    norm = sqrt(sum(c * c for c in a.values())) * sqrt(sum(c * c for c in b.values()))
    return dot / norm if norm else 0.0


# Core vocabulary so short review comments aren't penalized for domain terms.
_COMMON_WORDS = frozenset(
    """
    a able about add adding after again all also an and any approach are
    argument array as at bad be because been before better block branch
    break bug build but by call can case change check class clean clear
    code comment commit common condition config consider correct could
    current data default delete design diff do docs does done down each
    edge else empty error even every example expect fail failure feature
    field file fix flag for format from function get good great handle
    has have hello help here hi how i if implementation import in index
    input instead into is issue it its just keep key know last left let
    like line lint list log logic look loop main make may maybe merge
    method might missing more move much must my name need new nice nit no
    not note now null number object of off ok on one only option or other
    our out output over parameter pass patch path perhaps place please
    point possible prefer print problem pull push question quick read
    reason refactor release remove rename request return review right run
    same see seems set should simple since small so some split start state
    still string style such suggest sure syntax take test tests than thank
    thanks that the them then there these they this though thought thread
    time to try type under unit until up update updated use used using
    value variable version very want was way we well were what when where
    which while why will with work would wrong yes yet you your
    """.split()
)

_LETTERS_RE = re.compile(r"^[a-z']+$")
_VOWEL_RE = re.compile(r"[aeiouy]")
_TERMINAL_RE = re.compile(r"[.!?:`)\]]\s*$")


def rule_based_fluency(text: str) -> float:
    """Well-formedness heuristic in [0, 1]: word-likeness plus boundary sanity.

    Word-likeness is the fraction of prose tokens that are known common
    words or at least pronounceable (contain a vowel); code spans are
    excluded from the denominator. Boundary sanity checks that the text
    starts like a sentence and ends with terminal punctuation.
    """
    text = normalize_text(text).strip()
    if not text:
        return 0.0
    prose = strip_code_spans(text)
    tokens = [t for t in prose.lower().split() if t]
    letter_tokens = [t.strip(".,!?;:()[]\"'") for t in tokens]
    letter_tokens = [t for t in letter_tokens if t and _LETTERS_RE.match(t)]
    if letter_tokens:
        wordlike = sum(
            1 for t in letter_tokens if t in _COMMON_WORDS or _VOWEL_RE.search(t)
        ) / len(letter_tokens)
    else:
        wordlike = 0.5  # pure code/symbols: no prose evidence either way
    starts_ok = bool(re.match(r"^[A-Z\"'`(\[]|^```", text))
    ends_ok = bool(_TERMINAL_RE.search(text))
    boundary = (0.5 if starts_ok else 0.0) + (0.5 if ends_ok else 0.0)
    return min(1.0, max(0.0, 0.7 * wordlike + 0.3 * boundary))


def register_content_scorer(name: str, scorer: ContentScorer) -> None:
    _registry.content[name] = scorer


def register_fluency_scorer(name: str, scorer: FluencyScorer) -> None:
    _registry.fluency[name] = scorer


def content_scorer(name: str = "bag_cosine") -> ContentScorer:
    try:
        return _registry.content[name]
    except KeyError:
        raise KeyError(f"no content scorer registered as {name!r}") from None


def fluency_scorer(name: str = "rule_based") -> FluencyScorer:
    try:
        return _registry.fluency[name]
    except KeyError:
        raise KeyError(f"no fluency scorer registered as {name!r}") from None


register_content_scorer("bag_cosine", bag_cosine_similarity)
register_fluency_scorer("rule_based", rule_based_fluency)
