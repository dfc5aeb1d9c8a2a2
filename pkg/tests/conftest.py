import pytest

from reviewmod.backends import (
    LexiconBackend,
    MockCompletionBackend,
    MockRule,
    Registry,
)
from reviewmod.records import CommentRecord
from reviewmod.taxonomy import default_taxonomy

INSULT_RESPONSE = (
    '<result><category name="insult">Dismisses the work as "garbage".</category></result>'
)
NON_TOXIC_RESPONSE = (
    '<result><category name="non_toxic">No hostile language present.</category></result>'
)
REWRITE_RESPONSE = (
    "The draft attacks the work instead of the problem.\n"
    "<rewrite>This implementation has real problems; could you revisit the design?</rewrite>"
)


@pytest.fixture(scope="session")
def taxonomy():
    return default_taxonomy()


@pytest.fixture()
def toxic_comment():
    return CommentRecord(id="c-toxic", body="This code is garbage, fix your crap.")


@pytest.fixture()
def civil_comment():
    return CommentRecord(id="c-civil", body="Looks good, one nit on naming.")


def make_registry(**overrides) -> Registry:
    """Registry with lexicon filter, rule-driven coach and reframer mocks."""
    registry = Registry()
    registry.register_score(LexiconBackend())
    registry.register_completion(
        overrides.get("coach")
        or MockCompletionBackend(
            backend_id="coach",
            rules=(MockRule(contains="garbage", response=INSULT_RESPONSE),),
            default_response=NON_TOXIC_RESPONSE,
        )
    )
    registry.register_completion(
        overrides.get("reframer")
        or MockCompletionBackend(
            backend_id="reframer",
            default_response=REWRITE_RESPONSE,
        )
    )
    return registry


@pytest.fixture()
def registry():
    return make_registry()
