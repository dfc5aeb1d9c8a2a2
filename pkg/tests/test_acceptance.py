"""Release acceptance gate: one test per criterion, one printed verdict line each.

Corpus-scale model scores from the production deployment depend on hosted
fine-tuned models and private annotated data and are not reproducible in a
desk run analysis, so acceptance rests on metric-kernel oracles, protocol
conformance, and deterministic end-to-end behavior. Every numeric tolerance
below is pinned; loosening one is a release decision, not a test fix.
"""

import json
import math
import random
import time
from contextlib import contextmanager

import pytest
import yaml
from click.testing import CliRunner

from reviewmod.backends import LexiconBackend, MockCompletionBackend, Registry
from reviewmod.cli import main
from reviewmod.coach import ParseMode, parse_coach_response
from reviewmod.corpus import LabeledCorpus, LabeledRecord, stratified_kfold
from reviewmod.metrics import (
    ConfusionCounts,
    MultiLabelEval,
    PairScore,
    RaterPair,
    TstEval,
    cohen_kappa,
    macro_f1,
    macro_mcc,
    mcc,
    precision_recall_f1,
)
from reviewmod.records import CommentRecord, Label, ParseStatus
from reviewmod.reframer import ReframeConfig, build_parallel_corpus
from reviewmod.taxonomy import default_taxonomy


@contextmanager
def _criterion(name: str, capsys):
    """Print one verdict line per criterion that survives output capture."""
    try:
        yield
    except BaseException:
        with capsys.disabled():
            print(f"\n[acceptance] {name}: FAIL", flush=True)
        raise
    with capsys.disabled():
        print(f"\n[acceptance] {name}: PASS", flush=True)


# --- criterion 1: metric kernels against independent recomputation ------------------

def _brute_prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


def _brute_mcc(tp: int, fp: int, fn: int, tn: int) -> float:
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


# hand-computed on paper; frozen, not derived from the implementation
MCC_ORACLES = [
    (ConfusionCounts(tp=2, fp=1, fn=1, tn=2), 0.3333333333333333),
    (ConfusionCounts(tp=10, fp=5, fn=3, tn=2), 0.060522753266880246),
    (ConfusionCounts(tp=7, fp=2, fn=1, tn=9), 0.6854365268376295),
    (ConfusionCounts(tp=5, fp=0, fn=0, tn=5), 1.0),
    (ConfusionCounts(tp=0, fp=3, fn=4, tn=0), -1.0),
    (ConfusionCounts(tp=3, fp=3, fn=3, tn=3), 0.0),
]


def test_metric_oracle_suite(capsys):
    with _criterion("metric oracle suite", capsys):
        started = time.perf_counter()

        # reference operating point: precision 0.98, recall 0.96
        counts = ConfusionCounts(tp=1176, fp=24, fn=49, tn=28_000)
        precision, recall, f1 = precision_recall_f1(counts)
        assert abs(precision - 0.98) < 1e-12
        assert abs(recall - 0.96) < 1e-12
        assert abs(f1 - 0.97) <= 0.005

        for oracle_counts, expected in MCC_ORACLES:
            assert abs(mcc(oracle_counts) - expected) <= 1e-12

        rng = random.Random(1176)
        for _ in range(1_000):
            n_items = rng.randint(1, 8)
            cats = [f"cat{j}" for j in range(rng.randint(1, 3))]
            gold = {c: [rng.random() < 0.5 for _ in range(n_items)] for c in cats}
            pred = {c: [rng.random() < 0.5 for _ in range(n_items)] for c in cats}
            eval_ = MultiLabelEval.from_labels(gold, pred)
            f1s, mccs = [], []
            for c in cats:
                tp = sum(g and p for g, p in zip(gold[c], pred[c]))
                fp = sum((not g) and p for g, p in zip(gold[c], pred[c]))
                fn = sum(g and (not p) for g, p in zip(gold[c], pred[c]))
                tn = n_items - tp - fp - fn
                f1s.append(_brute_prf(tp, fp, fn)[2])
                mccs.append(_brute_mcc(tp, fp, fn, tn))
            assert abs(macro_f1(eval_) - sum(f1s) / len(f1s)) <= 1e-12
            assert abs(macro_mcc(eval_) - sum(mccs) / len(mccs)) <= 1e-12

        assert time.perf_counter() - started < 5.0


# --- criterion 2: J aggregation contract ---------------------------------------------

def test_j_score_contract(capsys):
    with _criterion("j-score contract", capsys):
        started = time.perf_counter()
        rng = random.Random(20260822)
        for _ in range(1_000):
            n = rng.randint(1, 24)
            scores = [
                PairScore(acc=rng.randint(0, 1), sim=rng.random(), flu=rng.random())
                for _ in range(n)
            ]
            ev = TstEval.from_pair_scores(scores)
            expected_j = sum(s.acc * s.sim * s.flu for s in scores) / n
            assert abs(ev.j - expected_j) <= 1e-12
            assert ev.j <= ev.sta
            saturated = TstEval.from_pair_scores(
                [PairScore(acc=s.acc, sim=1.0, flu=1.0) for s in scores]
            )
            assert saturated.j == saturated.sta
        assert time.perf_counter() - started < 5.0


# --- criterion 3: agreement kernel ----------------------------------------------------

def test_kappa_suite(capsys):
    with _criterion("kappa suite", capsys):
        rng = random.Random(11)
        flips = [rng.random() < 0.5 for _ in range(200)]
        identical = RaterPair(rater_a={"insult": flips}, rater_b={"insult": list(flips)})
        assert cohen_kappa(identical) == 1.0

        # 10-item table engineered on paper to land on exactly 3/5
        table = RaterPair(
            rater_a={"insult": [True] * 5 + [False] * 5},
            rater_b={
                "insult": [True, True, True, True, False, True, False, False, False, False]
            },
        )
        assert cohen_kappa(table) == 0.6

        big = random.Random(97)
        a = [big.random() < 0.5 for _ in range(10_000)]
        b = [big.random() < 0.5 for _ in range(10_000)]
        independent = RaterPair(rater_a={"c": a}, rater_b={"c": b})
        assert abs(cohen_kappa(independent)) < 0.05


# --- criterion 4: split invariants ----------------------------------------------------

def _synthetic_corpus(toxic_n: int, civil_n: int) -> LabeledCorpus:
    records = [
        LabeledRecord(
            comment=CommentRecord(id=f"t{i:05d}", body="placeholder"),
            label=Label.TOXIC,
            categories=frozenset({"insult"}),
        )
        for i in range(toxic_n)
    ] + [
        LabeledRecord(
            comment=CommentRecord(id=f"n{i:05d}", body="placeholder"),
            label=Label.NON_TOXIC,
        )
        for i in range(civil_n)
    ]
    return LabeledCorpus(records=tuple(records))


def _fold_counts_by_class(corpus: LabeledCorpus, assignment: dict) -> dict:
    counts: dict = {}
    for record in corpus.records:
        fold = assignment[record.comment.id]
        counts.setdefault(record.label, {}).setdefault(fold, 0)
        counts[record.label][fold] += 1
    return counts


def test_split_invariants(capsys):
    with _criterion("split invariants", capsys):
        started = time.perf_counter()
        rng = random.Random(4242)
        for _ in range(200):
            k = rng.randint(2, 8)
            toxic_n = rng.randint(k, 120)
            civil_n = rng.randint(k, 200)
            corpus = _synthetic_corpus(toxic_n, civil_n)
            split = stratified_kfold(corpus, k, seed=rng.randint(0, 10**6))
            all_ids = {r.comment.id for r in corpus.records}
            assert set(split.assignment) == all_ids  # totality; dict keys = disjoint
            folds = {f"fold_{i}" for i in range(k)}
            assert set(split.assignment.values()) <= folds
            for label, per_fold in _fold_counts_by_class(corpus, split.assignment).items():
                assert len(per_fold) == k
                assert max(per_fold.values()) - min(per_fold.values()) <= 1

        reference = _synthetic_corpus(10_120, 28_641)
        split = stratified_kfold(reference, 10, seed=0)
        by_class = _fold_counts_by_class(reference, split.assignment)
        assert sorted(by_class[Label.TOXIC].values()) == [1_012] * 10
        assert sorted(by_class[Label.NON_TOXIC].values()) == [2_864] * 9 + [2_865]

        assert time.perf_counter() - started < 10.0


# --- criterion 5: classification-reply parser robustness ------------------------------

WELL_FORMED = [
    ('<result><category name="insult">calls the patch garbage</category></result>',
     {"insult"}),
    ('<result><category name="threat">promises to block every\nfuture patch</category></result>',
     {"threat"}),
    ('<result><category name="insult">name-calling</category>'
     '<category name="mocking">sneering quote of the commit message</category></result>',
     {"insult", "mocking"}),
    ('<result><category name="impatience">demands an instant fix</category>'
     '<category name="arrogance">dismisses the author outright</category>'
     '<category name="entitlement">expects free weekend work</category></result>',
     {"impatience", "arrogance", "entitlement"}),
    ('<result><category name="non_toxic">civil technical critique</category></result>',
     set()),
    ('<result><category name="Insult">upper-cased label</category></result>',
     {"insult"}),
    ('<result><category name="Bitter Frustration">venting at the build</category></result>',
     {"bitter_frustration"}),
    ('<result><category name="IDENTITY ATTACK">targets the author\'s group</category></result>',
     {"identity_attack"}),
    ('   \n<result><category name="trolling">bait, not review</category></result>\n  ',
     {"trolling"}),
    ('<?xml version="1.0"?><result><category name="profanity">swears at the diff</category></result>',
     {"profanity"}),
    ('<result><!-- reviewer note --><category name="profanity">expletive in line one</category></result>',
     {"profanity"}),
    ('<result><category name="object_directed">attacks the code &amp; the tests</category></result>',
     {"object_directed"}),
    ("<result><category name='trolling'>single-quoted attribute</category></result>",
     {"trolling"}),
    ('<result><category name="insult">mocks `parse()` by name</category></result>',
     {"insult"}),
    ('<result>'
     + "".join(
         f'<category name="{c}">covered</category>'
         for c in (
             "arrogance", "bitter_frustration", "entitlement", "identity_attack",
             "impatience", "insult", "mocking", "object_directed", "profanity",
             "threat", "trolling",
         )
     )
     + "</result>",
     {"arrogance", "bitter_frustration", "entitlement", "identity_attack",
      "impatience", "insult", "mocking", "object_directed", "profanity",
      "threat", "trolling"}),
    ('<result>\n  <category name="threat">escalation</category>\n\n'
     '  <category name="insult">put-down</category>\n</result>',
     {"threat", "insult"}),
    ('<result><category name="mocking">quotes &lt;code&gt; in a sneer</category></result>',
     {"mocking"}),
    ('<result><category name="impatience">why is this STILL open</category></result>',
     {"impatience"}),
    ('<result><category name="insult">explanation mentioning the word category</category></result>',
     {"insult"}),
    ('\t<result>\t<category name="entitlement">demands priority support</category>\t</result>',
     {"entitlement"}),
]

# every case must fail strict parsing; the set is what lenient mode may recover
MALFORMED = [
    ("", set()),
    ("   \n\t ", set()),
    ("no markup whatsoever, just prose.", set()),
    ('The comment is hostile. <result><category name="insult">direct put-down'
     "</category></result> Hope that helps!", {"insult"}),
    ('<answer><category name="mocking">wrapped in the wrong root</category></answer>',
     {"mocking"}),
    ("<result><category>missing the name attribute</category></result>", set()),
    ('<result><category name="threat">no closing result tag</category>', {"threat"}),
    ('<result><category name="insult">unclosed element</result>', set()),
    ('<result><category name="profanity">a & b</category></result>', {"profanity"}),
    ('<result><category name="sarcasm">not in the taxonomy</category></result>', set()),
    ('<result><category name="sarcasm">unknown</category>'
     '<category name="impatience">known</category></result>', {"impatience"}),
    ('<result><category name="non_toxic">clean</category>'
     '<category name="insult">but also this</category></result>', {"insult"}),
    ('{"categories": ["insult"]}', set()),
    ('```xml\n<result><category name="threat">fenced reply</category></result>\n```',
     {"threat"}),
    ('<result><category name="insult">first</category></result>'
     '<result><category name="mocking">second document</category></result>',
     {"insult", "mocking"}),
    ('<RESULT><category name="trolling">shouting root</category></RESULT>', {"trolling"}),
    ("<result><category name=insult>unquoted attribute</category></result>", set()),
    ('<category name="impatience">bare element, no root</category>', {"impatience"}),
    ('<result><category name="insult">typo in close tag</category></resul>', {"insult"}),
    ("⟨⟨<>&&&```\U0001d54f", set()),
]


def test_parser_robustness(capsys):
    with _criterion("parser robustness", capsys):
        taxonomy = default_taxonomy()
        toxic_ids = set(taxonomy.toxic_ids)

        for raw, expected in WELL_FORMED:
            parsed = parse_coach_response(raw, taxonomy, ParseMode.STRICT)
            assert parsed.parse_status is ParseStatus.STRICT_OK, raw
            assert set(parsed.categories) == expected, raw

        strict_accepted = 0
        for raw, recoverable in MALFORMED:
            strict = parse_coach_response(raw, taxonomy, ParseMode.STRICT)
            assert strict.parse_status is ParseStatus.FAILED, raw
            lenient = parse_coach_response(raw, taxonomy, ParseMode.LENIENT)
            assert set(lenient.categories) >= set(strict.categories)
            assert set(lenient.categories) == recoverable, raw
            assert set(lenient.categories) <= toxic_ids
            expected_status = (
                ParseStatus.LENIENT_RECOVERED if recoverable else ParseStatus.FAILED
            )
            assert lenient.parse_status is expected_status, raw
            strict_accepted += strict.parse_status is ParseStatus.STRICT_OK
        assert strict_accepted == 0

        fragments = [
            "<result>", "</result>", "<category ", 'name="insult"', 'name="sarcasm"',
            ">", "</category>", "name=", '"', "'", "&", "<", "garbage text", "```",
            "\n", "\U0001f642", "\\", "non_toxic",
            '<category name="threat">t</category>',
            '<?xml version="1.0"?>', "<!--", "-->", "<![CDATA[", "]]>",
        ]
        rng = random.Random(0xFACE)
        for _ in range(10_000):
            raw = "".join(rng.choice(fragments) for _ in range(rng.randint(0, 10)))
            for mode in (ParseMode.STRICT, ParseMode.LENIENT):
                parsed = parse_coach_response(raw, taxonomy, mode)  # must not raise
                assert set(parsed.categories) <= toxic_ids


# --- criterion 6: deterministic end-to-end batch moderation ---------------------------

INSULT_RESPONSE = (
    '<result><category name="insult">dismissive name-calling</category></result>'
)
REWRITE_RESPONSE = (
    "The tone is hostile.\n"
    "<rewrite>This implementation has real problems; please revisit the design.</rewrite>"
)

_MODULES = [
    "parser", "allocator", "scheduler", "cache layer", "retry shim",
    "lexer", "router", "pager", "queue", "linker",
]
_FEATURES = ["rollback", "paging", "batching", "sharding"]
_PATHS = ["error path", "startup path", "shutdown hook", "retry path", "fallback"]


def _fixture_rows() -> list[dict]:
    toxic = (
        [f"this {m} is garbage, rip it out" for m in _MODULES]
        + [f"what an idiot move in {f}" for f in _FEATURES]
        + [f"the {p} is disgusting and lazy" for p in _PATHS]
    )
    toxic.append(toxic[0])  # exact duplicate: second occurrence must hit the cache
    civil = (
        [f"nice cleanup of the {m}" for m in _MODULES]
        + [f"could the {p} get one more test?" for p in _PATHS]
        + [f"lgtm, tiny naming nit in {f}" for f in _FEATURES]
        + [
            "please rename `garbage_list` before merge",
            "the `idiot_check()` helper still needs a docstring",
            "sorry for the slow turnaround on this review",
            "works for me after a rebase",
            "can we land the migration first?",
            "good catch on the off by one",
            "let's split this into two commits",
            "benchmarks look flat, shipping as is",
            "added a regression test for the None case",
            "the changelog entry needs a version number",
            "happy to pair on the flaky test tomorrow",
        ]
    )
    bodies = toxic + civil
    assert len(bodies) == 50
    order = random.Random(7)
    order.shuffle(bodies)
    return [{"id": f"c{i:02d}", "body": body} for i, body in enumerate(bodies)]


def _write_run_config(tmp_path, run: int):
    coach_log = tmp_path / f"coach_calls_{run}.jsonl"
    reframer_log = tmp_path / f"reframer_calls_{run}.jsonl"
    doc = {
        "pipeline_version": "1.0.0",
        "backends": [
            {"id": "lexicon", "kind": "lexicon"},
            {
                "id": "coach",
                "kind": "mock-complete",
                "default_response": INSULT_RESPONSE,
                "call_log": str(coach_log),
            },
            {
                "id": "reframer",
                "kind": "mock-complete",
                "default_response": REWRITE_RESPONSE,
                "call_log": str(reframer_log),
            },
        ],
    }
    path = tmp_path / f"service_{run}.yaml"
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")
    return path, coach_log, reframer_log


def _normalize_records(out_path) -> list[str]:
    """Re-serialize output records with wall-clock fields removed."""
    lines = []
    for line in out_path.read_text(encoding="utf-8").splitlines():
        doc = json.loads(line)
        doc.pop("stage_timings", None)
        if isinstance(doc.get("verdict"), dict):
            doc["verdict"].pop("latency_ms", None)
        lines.append(json.dumps(doc, sort_keys=True))
    return lines


def _count_lines(path) -> int:
    if not path.exists():
        return 0
    return sum(1 for line in path.read_text(encoding="utf-8").splitlines() if line.strip())


def test_end_to_end_determinism(tmp_path, capsys):
    with _criterion("end-to-end determinism", capsys):
        rows = _fixture_rows()
        in_path = tmp_path / "comments.jsonl"
        in_path.write_text(
            "".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8"
        )
        runner = CliRunner()
        runs = []
        for run in range(3):
            config, coach_log, reframer_log = _write_run_config(tmp_path, run)
            out_path = tmp_path / f"out_{run}.jsonl"
            result = runner.invoke(
                main,
                [
                    "moderate-file",
                    "--config", str(config),
                    "--in", str(in_path),
                    "--out", str(out_path),
                ],
            )
            assert result.exit_code == 0, result.output
            runs.append((out_path, coach_log, reframer_log))

        normalized = [_normalize_records(out_path) for out_path, _, _ in runs]
        assert normalized[0] == normalized[1] == normalized[2]

        docs = [json.loads(line) for line in runs[0][0].read_text(encoding="utf-8").splitlines()]
        assert len(docs) == 50
        toxic_docs = [d for d in docs if d["verdict"]["label"] == "toxic"]
        assert len(toxic_docs) == 20
        for doc in docs:
            if doc["verdict"]["label"] == "non_toxic":
                assert doc["assignment"] is None
                assert doc["rewrite"] is None
            else:
                assert doc["assignment"] is not None
                assert doc["rewrite"] is not None

        # the duplicated body is served from cache: 19 distinct toxic texts,
        # so each downstream backend is called once per distinct text only
        dup_body = f"this {_MODULES[0]} is garbage, rip it out"
        dup_docs = [d for d in docs if d.get("cached") and d["verdict"]["label"] == "toxic"]
        by_body = {r["id"]: r["body"] for r in rows}
        assert len(dup_docs) == 1
        assert by_body[dup_docs[0]["comment_id"]] == dup_body
        for _, coach_log, reframer_log in runs:
            assert _count_lines(coach_log) == 19
            assert _count_lines(reframer_log) == 19


# --- criterion 7: corpus-builder checkpoint resume -------------------------------------

class _InterruptingTeacher:
    """Delegates to an inner mock; dies partway through the run."""

    def __init__(self, inner: MockCompletionBackend, fail_on_call: int):
        self.backend_id = inner.backend_id
        self.inner = inner
        self.fail_on_call = fail_on_call
        self.calls = 0

    def complete(self, messages, params):
        self.calls += 1
        if self.calls == self.fail_on_call:
            raise KeyboardInterrupt
        return self.inner.complete(messages, params)


def _resume_registry(teacher) -> Registry:
    registry = Registry()
    registry.register_score(LexiconBackend(backend_id="lexicon"))
    registry.register_completion(teacher)
    return registry


def test_corpus_builder_resumability(tmp_path, capsys):
    with _criterion("corpus builder resumability", capsys):
        inputs = [
            CommentRecord(id=f"p{i}", body=f"this {m} is garbage, burn it down")
            for i, m in enumerate(_MODULES[:6])
        ]
        cfg = ReframeConfig()
        out_path = tmp_path / "pairs.jsonl"
        rejects_path = tmp_path / "rejects.jsonl"
        checkpoint_path = tmp_path / "checkpoint.jsonl"

        first = _InterruptingTeacher(
            MockCompletionBackend(backend_id="teacher", default_response=REWRITE_RESPONSE),
            fail_on_call=4,
        )
        with pytest.raises(KeyboardInterrupt):
            build_parallel_corpus(
                inputs,
                "teacher",
                cfg,
                _resume_registry(first),
                out_path=out_path,
                rejects_path=rejects_path,
                checkpoint_path=checkpoint_path,
            )
        assert first.inner.calls == 3  # three items finished before the interrupt

        resumed = MockCompletionBackend(backend_id="teacher", default_response=REWRITE_RESPONSE)
        pairs = build_parallel_corpus(
            inputs,
            "teacher",
            cfg,
            _resume_registry(resumed),
            out_path=out_path,
            rejects_path=rejects_path,
            checkpoint_path=checkpoint_path,
        )

        # exactly one teacher call per unfinished item, including the one
        # whose first call was cut short before its checkpoint mark
        assert resumed.calls == 3
        assert [p.pair_id for p in pairs] == [c.id for c in inputs]
        written = [
            json.loads(line)["pair_id"]
            for line in out_path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        assert written == [c.id for c in inputs]
        assert not rejects_path.exists()
