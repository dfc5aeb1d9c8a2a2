from .base import (
    AdmissionGate,
    BackendConfig,
    ChatMessage,
    CompletionBackend,
    DecodingParams,
    Registry,
    Role,
    ScoreBackend,
    prompt_fingerprint,
)
from .http import HttpCompletionBackend, ScoreViaCompletion
from .lexicon import (
    Lexicon,
    LexiconBackend,
    classify_lexicon,
    default_lexicon,
    load_lexicon,
    parse_lexicon,
    tokenize_for_matching,
)
from .mock import MockCompletionBackend, MockRule, MockScoreBackend

__all__ = [
    "AdmissionGate",
    "BackendConfig",
    "ChatMessage",
    "CompletionBackend",
    "DecodingParams",
    "HttpCompletionBackend",
    "Lexicon",
    "LexiconBackend",
    "MockCompletionBackend",
    "MockRule",
    "MockScoreBackend",
    "Registry",
    "Role",
    "ScoreBackend",
    "ScoreViaCompletion",
    "classify_lexicon",
    "default_lexicon",
    "load_lexicon",
    "parse_lexicon",
    "prompt_fingerprint",
    "tokenize_for_matching",
]
