import json
from collections import Counter

import pytest

from reviewmod.corpus import (
    HOLDOUT_TAGS,
    CorpusFormatError,
    LabeledCorpus,
    LabeledRecord,
    _apportion,
    holdout_split,
    ingest,
    read_split,
    stratified_kfold,
    write_corpus,
    write_split,
)
from reviewmod.errors import ConfigError
from reviewmod.records import CommentRecord, Label


def write_lines(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")


def make_corpus(toxic: int, non_toxic: int) -> LabeledCorpus:
    records = []
    for i in range(toxic):
        records.append(
            LabeledRecord(
                comment=CommentRecord(id=f"t{i:05d}", body=f"toxic {i}"),
                label=Label.TOXIC,
            )
        )
    for i in range(non_toxic):
        records.append(
            LabeledRecord(
                comment=CommentRecord(id=f"n{i:05d}", body=f"civil {i}"),
                label=Label.NON_TOXIC,
            )
        )
    return LabeledCorpus(records=tuple(records))


# --- ingestion ---------------------------------------------------------------------

def test_ingest_line_records(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_lines(
        path,
        [
            {"id": "a", "body": "fine comment", "label": "non_toxic"},
            {
                "id": "b",
                "body": "this is garbage",
                "label": "toxic",
                "categories": ["insult"],
                "source": "tracker",
            },
        ],
    )
    corpus = ingest(path)
    assert len(corpus) == 2
    assert corpus.records[1].categories == frozenset({"insult"})
    assert corpus.records[1].comment.source == "tracker"
    assert corpus.by_label()[Label.TOXIC] == ["b"]


def test_ingest_skips_blank_lines(tmp_path):
    path = tmp_path / "corpus.jsonl"
    path.write_text(
        '\n{"id": "a", "body": "x", "label": "toxic"}\n\n', encoding="utf-8"
    )
    assert len(ingest(path)) == 1


def test_ingest_reports_bad_json_row(tmp_path):
    path = tmp_path / "corpus.jsonl"
    path.write_text(
        '{"id": "a", "body": "x", "label": "toxic"}\nnot json\n', encoding="utf-8"
    )
    with pytest.raises(CorpusFormatError, match="row 2: invalid JSON"):
        ingest(path)


def test_ingest_reports_missing_column(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_lines(path, [{"id": "a", "label": "toxic"}])
    with pytest.raises(CorpusFormatError, match="row 1: missing required column 'body'"):
        ingest(path)


def test_ingest_reports_duplicate_with_both_rows(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_lines(
        path,
        [
            {"id": "a", "body": "x", "label": "toxic"},
            {"id": "b", "body": "y", "label": "toxic"},
            {"id": "a", "body": "z", "label": "toxic"},
        ],
    )
    with pytest.raises(CorpusFormatError, match=r"row 3: duplicate id 'a' \(first at row 1\)"):
        ingest(path)


def test_ingest_reports_empty_body(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_lines(path, [{"id": "a", "body": "   ", "label": "toxic"}])
    with pytest.raises(CorpusFormatError, match="row 1: empty body"):
        ingest(path)


def test_ingest_reports_unknown_label(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_lines(path, [{"id": "a", "body": "x", "label": "spicy"}])
    with pytest.raises(CorpusFormatError, match="row 1: label 'spicy'"):
        ingest(path)


def test_ingest_non_object_row(tmp_path):
    path = tmp_path / "corpus.jsonl"
    path.write_text('["not", "an", "object"]\n', encoding="utf-8")
    with pytest.raises(CorpusFormatError, match="row 1: expected a JSON object"):
        ingest(path)


def test_ingest_csv(tmp_path):
    path = tmp_path / "corpus.csv"
    path.write_text(
        "id,body,label,categories\n"
        "a,fine comment,non_toxic,\n"
        'b,"utter garbage, redo",toxic,insult;impatience\n',
        encoding="utf-8",
    )
    corpus = ingest(path, format="comma-separated")
    assert len(corpus) == 2
    assert corpus.records[1].categories == frozenset({"insult", "impatience"})


def test_ingest_csv_missing_header(tmp_path):
    path = tmp_path / "corpus.csv"
    path.write_text("id,text\na,hello\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match="header row must include"):
        ingest(path, format="comma-separated")


def test_ingest_csv_rows_numbered_after_header(tmp_path):
    path = tmp_path / "corpus.csv"
    path.write_text("id,body,label\na,x,toxic\na,y,toxic\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match=r"row 3: duplicate id 'a' \(first at row 2\)"):
        ingest(path, format="comma-separated")


def test_ingest_unknown_format(tmp_path):
    path = tmp_path / "corpus.bin"
    path.write_text("x", encoding="utf-8")
    with pytest.raises(ConfigError, match="unknown corpus format"):
        ingest(path, format="parquet")


def test_corpus_roundtrip(tmp_path):
    corpus = make_corpus(3, 4)
    path = tmp_path / "out.jsonl"
    write_corpus(corpus, path)
    loaded = ingest(path)
    assert [r.comment.id for r in loaded.records] == [
        r.comment.id for r in corpus.records
    ]
    assert [r.label for r in loaded.records] == [r.label for r in corpus.records]


def test_corpus_rejects_duplicate_ids():
    record = LabeledRecord(
        comment=CommentRecord(id="dup", body="x"), label=Label.TOXIC
    )
    with pytest.raises(ValueError, match="duplicate record ids"):
        LabeledCorpus(records=(record, record))


# --- k-fold splitting ---------------------------------------------------------------

def fold_class_sizes(split, corpus):
    """tag -> Counter(label -> count)"""
    labels = {r.comment.id: r.label for r in corpus.records}
    sizes: dict[str, Counter] = {}
    for record_id, tag in split.assignment.items():
        sizes.setdefault(tag, Counter())[labels[record_id]] += 1
    return sizes


def test_kfold_partitions_exactly():
    corpus = make_corpus(25, 40)
    split = stratified_kfold(corpus, k=5, seed=3)
    parts = split.partitions()
    assert set(parts) == {f"fold_{i}" for i in range(5)}
    all_ids = [i for fold in parts.values() for i in fold]
    assert len(all_ids) == len(corpus)
    assert set(all_ids) == {r.comment.id for r in corpus.records}


def test_kfold_per_class_balance_within_one():
    corpus = make_corpus(23, 37)
    split = stratified_kfold(corpus, k=4, seed=1)
    sizes = fold_class_sizes(split, corpus)
    for label in (Label.TOXIC, Label.NON_TOXIC):
        counts = [sizes[f"fold_{i}"][label] for i in range(4)]
        assert max(counts) - min(counts) <= 1
        assert sum(counts) == (23 if label is Label.TOXIC else 37)


def test_kfold_reference_fold_sizes():
    # 10,120 toxic and 28,641 non-toxic into 10 folds: every fold holds
    # 1,012 toxic and 2,864 or 2,865 non-toxic comments
    corpus = make_corpus(10_120, 28_641)
    split = stratified_kfold(corpus, k=10, seed=0)
    sizes = fold_class_sizes(split, corpus)
    toxic_counts = sorted(sizes[f"fold_{i}"][Label.TOXIC] for i in range(10))
    non_toxic_counts = sorted(sizes[f"fold_{i}"][Label.NON_TOXIC] for i in range(10))
    assert toxic_counts == [1_012] * 10
    assert non_toxic_counts == [2_864] * 9 + [2_865]


def test_kfold_seed_determinism():
    corpus = make_corpus(30, 50)
    a = stratified_kfold(corpus, k=5, seed=9)
    b = stratified_kfold(corpus, k=5, seed=9)
    c = stratified_kfold(corpus, k=5, seed=10)
    assert a.assignment == b.assignment
    assert a.assignment != c.assignment


def test_kfold_insertion_order_irrelevant():
    base = make_corpus(12, 18)
    reordered = LabeledCorpus(records=tuple(reversed(base.records)))
    a = stratified_kfold(base, k=3, seed=2)
    b = stratified_kfold(reordered, k=3, seed=2)
    assert a.assignment == b.assignment


def test_kfold_validation():
    corpus = make_corpus(5, 5)
    with pytest.raises(ValueError, match="k must be >= 2"):
        stratified_kfold(corpus, k=1)
    with pytest.raises(ValueError, match="fewer than k"):
        stratified_kfold(corpus, k=6)


# --- holdout splitting ----------------------------------------------------------------

def test_apportionment_exact_and_remainders():
    assert _apportion(10, (8, 1, 1)) == [8, 1, 1]
    assert _apportion(10_120, (8, 1, 1)) == [8_096, 1_012, 1_012]
    assert _apportion(28_641, (8, 1, 1)) == [22_913, 2_864, 2_864]
    # remainder goes to the largest fractional part; ties to earlier slot
    assert _apportion(5, (1, 1)) == [3, 2]
    assert sum(_apportion(7, (3, 2, 2))) == 7


def test_holdout_reference_totals():
    corpus = make_corpus(10_120, 28_641)
    split = holdout_split(corpus, seed=0)
    assert split.scheme == "holdout:8:1:1"
    parts = split.partitions()
    assert {tag: len(ids) for tag, ids in parts.items()} == {
        "train": 31_009,
        "validation": 3_876,
        "test": 3_876,
    }
    sizes = fold_class_sizes(split, corpus)
    assert sizes["train"][Label.TOXIC] == 8_096
    assert sizes["validation"][Label.TOXIC] == 1_012
    assert sizes["test"][Label.TOXIC] == 1_012
    assert sizes["train"][Label.NON_TOXIC] == 22_913


def test_holdout_partitions_disjoint_and_total():
    corpus = make_corpus(17, 29)
    split = holdout_split(corpus, seed=4)
    parts = split.partitions()
    assert set(parts) == set(HOLDOUT_TAGS)
    ids = [i for p in parts.values() for i in p]
    assert len(ids) == len(set(ids)) == len(corpus)


def test_holdout_seed_determinism():
    corpus = make_corpus(40, 40)
    assert holdout_split(corpus, seed=5).assignment == holdout_split(corpus, seed=5).assignment
    assert holdout_split(corpus, seed=5).assignment != holdout_split(corpus, seed=6).assignment


def test_holdout_custom_ratios():
    corpus = make_corpus(50, 50)
    split = holdout_split(corpus, ratios=(6, 2, 2), seed=0)
    assert split.scheme == "holdout:6:2:2"
    sizes = fold_class_sizes(split, corpus)
    assert sizes["train"][Label.TOXIC] == 30
    assert sizes["validation"][Label.TOXIC] == 10


def test_holdout_validation():
    corpus = make_corpus(4, 4)
    with pytest.raises(ValueError, match="ratios"):
        holdout_split(corpus, ratios=(8, 1))
    with pytest.raises(ValueError, match="positive"):
        holdout_split(corpus, ratios=(8, 1, 0))
    with pytest.raises(ValueError, match="empty"):
        holdout_split(LabeledCorpus(records=()), seed=0)


# --- split files ------------------------------------------------------------------------

def test_split_file_roundtrip(tmp_path):
    corpus = make_corpus(9, 12)
    split = stratified_kfold(corpus, k=3, seed=7)
    path = tmp_path / "split.tsv"
    write_split(split, path)
    loaded = read_split(path)
    assert loaded.assignment == dict(split.assignment)
    assert loaded.seed == 7
    assert loaded.scheme == "kfold:3"


def test_split_file_layout(tmp_path):
    corpus = make_corpus(2, 2)
    split = holdout_split(corpus, seed=1)
    path = tmp_path / "split.tsv"
    write_split(split, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# scheme=holdout:8:1:1 seed=1"
    body = lines[1:]
    assert body == sorted(body)
    assert all("\t" in line for line in body)
