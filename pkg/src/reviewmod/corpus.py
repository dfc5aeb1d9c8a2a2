"""Dataset ingestion and reproducible splitting.

Corpus files are line records (JSON object per line) or comma-separated
with a header row; required columns are id, body, label, with optional
categories and source. Splitting is seed-deterministic via a documented
procedure: per class, sort ids, shuffle with the seeded RNG, then deal —
so identical (ids, k/ratios, seed) always reproduce the same assignment.
"""

from __future__ import annotations

import csv
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ConfigError
from .records import CommentRecord, Label


@dataclass(frozen=True)
class LabeledRecord:
    comment: CommentRecord
    label: Label
    categories: frozenset[str] = frozenset()


@dataclass(frozen=True)
class LabeledCorpus:
    records: tuple[LabeledRecord, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        ids = [r.comment.id for r in self.records]
        if len(ids) != len(set(ids)):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate record ids: {dupes[:5]}")

    def __len__(self) -> int:
        return len(self.records)

    def by_label(self) -> dict[Label, list[str]]:
        groups: dict[Label, list[str]] = {}
        for record in self.records:
            groups.setdefault(record.label, []).append(record.comment.id)
        return groups


@dataclass(frozen=True)
class SplitAssignment:
    """Every corpus id mapped to exactly one partition tag."""

    assignment: Mapping[str, str]
    seed: int
    scheme: str

    def partitions(self) -> dict[str, set[str]]:
        parts: dict[str, set[str]] = {}
        for record_id, tag in self.assignment.items():
            parts.setdefault(tag, set()).add(record_id)
        return parts


class CorpusFormatError(ConfigError):
    """Malformed corpus input, with the row (and column) that offended."""


_LABELS = {label.value: label for label in Label}


def _record_from_fields(
    row: int, doc: Mapping[str, object], seen: dict[str, int]
) -> LabeledRecord:
    for column in ("id", "body", "label"):
        if column not in doc or doc[column] in (None, ""):
            raise CorpusFormatError(f"row {row}: missing required column {column!r}")
    record_id = str(doc["id"])
    if record_id in seen:
        raise CorpusFormatError(
            f"row {row}: duplicate id {record_id!r} (first at row {seen[record_id]})"
        )
    seen[record_id] = row
    body = str(doc["body"])
    if not body.strip():
        raise CorpusFormatError(f"row {row}: empty body")
    label_text = str(doc["label"]).strip().lower()
    if label_text not in _LABELS:
        raise CorpusFormatError(
            f"row {row}: label {doc['label']!r} not in {sorted(_LABELS)}"
        )
    raw_categories = doc.get("categories") or ()
    if isinstance(raw_categories, str):
        raw_categories = [c for c in raw_categories.split(";") if c.strip()]
    source = doc.get("source")
    return LabeledRecord(
        comment=CommentRecord(
            id=record_id, body=body, source=str(source) if source else None
        ),
        label=_LABELS[label_text],
        categories=frozenset(str(c).strip() for c in raw_categories),
    )


def ingest(path: str | Path, format: str = "line-records") -> LabeledCorpus:
    """Load and validate a labeled corpus file.

    ``format`` is ``line-records`` (JSON object per line) or
    ``comma-separated`` (header row required). Diagnostics carry the
    offending row number.
    """
    path = Path(path)
    seen: dict[str, int] = {}
    records: list[LabeledRecord] = []
    if format == "line-records":
        with path.open(encoding="utf-8") as fh:
            for row, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    doc = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusFormatError(f"row {row}: invalid JSON ({exc})") from exc
                if not isinstance(doc, dict):
                    raise CorpusFormatError(f"row {row}: expected a JSON object")
                records.append(_record_from_fields(row, doc, seen))
    elif format == "comma-separated":
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"id", "body", "label"} <= set(
                reader.fieldnames
            ):
                raise CorpusFormatError(
                    "header row must include columns id, body, label"
                )
            for row, doc in enumerate(reader, start=2):
                records.append(_record_from_fields(row, doc, seen))
    else:
        raise ConfigError(f"unknown corpus format {format!r}")
    return LabeledCorpus(records=tuple(records), provenance=str(path))


def write_corpus(corpus: LabeledCorpus, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in corpus.records:
            doc = {
                "id": record.comment.id,
                "body": record.comment.body,
                "label": record.label.value,
                "categories": sorted(record.categories),
                "source": record.comment.source,
            }
            fh.write(json.dumps(doc, sort_keys=True) + "\n")


def _shuffled_class_ids(corpus: LabeledCorpus, seed: int) -> dict[Label, list[str]]:
    """Per class: ids sorted, then shuffled by a seed+class keyed RNG."""
    groups = corpus.by_label()
    shuffled: dict[Label, list[str]] = {}
    for label in sorted(groups, key=lambda l: l.value):
        ids = sorted(groups[label])
        rng = random.Random(f"{seed}:{label.value}")
        rng.shuffle(ids)
        shuffled[label] = ids
    return shuffled


def stratified_kfold(corpus: LabeledCorpus, k: int, seed: int = 0) -> SplitAssignment:
    """Deal each class round-robin into k folds after a seeded shuffle.

    Per class, fold sizes differ by at most one; folds partition the
    corpus exactly.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    assignment: dict[str, str] = {}
    for label, ids in _shuffled_class_ids(corpus, seed).items():
        if len(ids) < k:
            raise ValueError(
                f"class {label.value!r} has {len(ids)} members, fewer than k={k}"
            )
        for index, record_id in enumerate(ids):
            assignment[record_id] = f"fold_{index % k}"
    return SplitAssignment(assignment=assignment, seed=seed, scheme=f"kfold:{k}")


def _apportion(n: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment of n items by ratios (ties to earlier)."""
    total = sum(ratios)
    quotas = [n * r / total for r in ratios]
    counts = [int(q) for q in quotas]
    remainder = n - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return counts


HOLDOUT_TAGS = ("train", "validation", "test")


def holdout_split(
    corpus: LabeledCorpus,
    ratios: Sequence[float] = (8, 1, 1),
    seed: int = 0,
) -> SplitAssignment:
    """Stratified train/validation/test split at the given ratios.

    Per class, partition sizes are the largest-remainder apportionment of
    the class size, so each is within one of the exact proportional count.
    """
    if len(ratios) != len(HOLDOUT_TAGS):
        raise ValueError(f"expected {len(HOLDOUT_TAGS)} ratios, got {len(ratios)}")
    if any(r <= 0 for r in ratios):
        raise ValueError("ratios must be positive")
    if not corpus.records:
        raise ValueError("corpus is empty")
    assignment: dict[str, str] = {}
    for label, ids in _shuffled_class_ids(corpus, seed).items():
        counts = _apportion(len(ids), ratios)
        cursor = 0
        for tag, count in zip(HOLDOUT_TAGS, counts):
            for record_id in ids[cursor : cursor + count]:
                assignment[record_id] = tag
            cursor += count
    ratio_text = ":".join(str(int(r) if float(r).is_integer() else r) for r in ratios)
    return SplitAssignment(assignment=assignment, seed=seed, scheme=f"holdout:{ratio_text}")


def write_split(split: SplitAssignment, path: str | Path) -> None:
    """id<TAB>tag lines with a header comment carrying scheme and seed."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"# scheme={split.scheme} seed={split.seed}\n")
        for record_id in sorted(split.assignment):
            fh.write(f"{record_id}\t{split.assignment[record_id]}\n")


def read_split(path: str | Path) -> SplitAssignment:
    scheme, seed = "unknown", 0
    assignment: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for part in line[1:].split():
                if part.startswith("scheme="):
                    scheme = part.removeprefix("scheme=")
                elif part.startswith("seed="):
                    seed = int(part.removeprefix("seed="))
            continue
        record_id, tag = line.split("\t")
        assignment[record_id] = tag
    return SplitAssignment(assignment=assignment, seed=seed, scheme=scheme)
