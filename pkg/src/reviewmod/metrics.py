"""Classification and style-transfer metrics with exact closed-form kernels.

Covers the full reporting stack: precision/recall/F1 and MCC from binary
confusion counts, their macro-averaged multi-label forms, Cohen's kappa
for inter-rater agreement, and the style-transfer quartet (STA, content
preservation, fluency, J-score).

Degenerate-denominator conventions, fixed here as testable contracts:
F1 components with a 0/0 denominator are 0; an MCC with any zero factor
under the root is 0; a kappa whose chance agreement is exactly 1 is 1 when
observed agreement is 1, else 0. Kappa is computed in exact rational
arithmetic from integer counts, so constructed tables yield exact values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import sqrt
from typing import Iterable, Mapping, Sequence

from .backends.base import Registry
from .filtering import FilterConfig, classify_text
from .records import Label
from .scorers import ContentScorer, FluencyScorer


# --- binary confusion kernels -------------------------------------------------

@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def precision_recall_f1(c: ConfusionCounts) -> tuple[float, float, float]:
    """(precision, recall, F1); any 0/0 component is 0 by convention."""
    if c.total == 0:
        raise ValueError("empty confusion counts")
    precision = c.tp / (c.tp + c.fp) if (c.tp + c.fp) else 0.0
    recall = c.tp / (c.tp + c.fn) if (c.tp + c.fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return precision, recall, f1


def mcc(c: ConfusionCounts) -> float:
    """Matthews correlation coefficient; 0 when any root factor is 0."""
    if c.total == 0:
        raise ValueError("empty confusion counts")
    denom = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if denom == 0:
        return 0.0
    return (c.tp * c.tn - c.fp * c.fn) / sqrt(denom)


# --- multi-label macro metrics ------------------------------------------------

@dataclass(frozen=True)
class MultiLabelEval:
    """Per-category confusion counts over one evaluation set."""

    per_category: Mapping[str, ConfusionCounts]
    sample_count: int

    def __post_init__(self) -> None:
        if not self.per_category:
            raise ValueError("at least one category required")

    @classmethod
    def from_labels(
        cls,
        gold: Mapping[str, Sequence[bool]],
        predicted: Mapping[str, Sequence[bool]],
    ) -> "MultiLabelEval":
        """Build counts from aligned per-category boolean columns."""
        if set(gold) != set(predicted):
            raise ValueError("gold and predicted category sets differ")
        counts: dict[str, ConfusionCounts] = {}
        n = None
        for category in gold:
            g, p = list(gold[category]), list(predicted[category])
            if len(g) != len(p):
                raise ValueError(f"category {category!r}: column lengths differ")
            if n is None:
                n = len(g)
            elif n != len(g):
                raise ValueError("categories cover different sample counts")
            tp = sum(1 for gi, pi in zip(g, p) if gi and pi)
            fp = sum(1 for gi, pi in zip(g, p) if not gi and pi)
            fn = sum(1 for gi, pi in zip(g, p) if gi and not pi)
            tn = sum(1 for gi, pi in zip(g, p) if not gi and not pi)
            counts[category] = ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)
        return cls(per_category=counts, sample_count=n or 0)


def per_category_f1(m: MultiLabelEval) -> dict[str, float]:
    return {cat: precision_recall_f1(c)[2] for cat, c in m.per_category.items()}


def per_category_mcc(m: MultiLabelEval) -> dict[str, float]:
    return {cat: mcc(c) for cat, c in m.per_category.items()}


def macro_f1(m: MultiLabelEval) -> float:
    values = per_category_f1(m)
    return sum(values.values()) / len(values)


def macro_mcc(m: MultiLabelEval) -> float:
    values = per_category_mcc(m)
    return sum(values.values()) / len(values)


# --- inter-rater agreement ----------------------------------------------------

@dataclass(frozen=True)
class RaterPair:
    """Per-category binary decisions from two raters over the same items."""

    rater_a: Mapping[str, Sequence[bool]]
    rater_b: Mapping[str, Sequence[bool]]

    def __post_init__(self) -> None:
        if set(self.rater_a) != set(self.rater_b):
            raise ValueError("raters cover different category sets")
        if not self.rater_a:
            raise ValueError("at least one category required")
        lengths = {len(v) for v in self.rater_a.values()} | {
            len(v) for v in self.rater_b.values()
        }
        if len(lengths) != 1:
            raise ValueError("raters cover different item counts")
        if lengths == {0}:
            raise ValueError("at least one decision required")

    @property
    def item_count(self) -> int:
        return len(next(iter(self.rater_a.values())))


def _binary_kappa(a: Sequence[bool], b: Sequence[bool]) -> Fraction:
    n = len(a)
    observed = Fraction(sum(1 for x, y in zip(a, b) if x == y), n)
    a_yes = Fraction(sum(map(bool, a)), n)
    b_yes = Fraction(sum(map(bool, b)), n)
    expected = a_yes * b_yes + (1 - a_yes) * (1 - b_yes)
    if expected == 1:
        return Fraction(1) if observed == 1 else Fraction(0)
    return (observed - expected) / (1 - expected)


def cohen_kappa(r: RaterPair) -> float:
    """Chance-corrected agreement, macro-averaged over categories.

    Exact rational arithmetic internally: a table engineered to have
    kappa 3/5 comes out as exactly 0.6.
    """
    values = [_binary_kappa(r.rater_a[c], r.rater_b[c]) for c in sorted(r.rater_a)]
    return float(sum(values) / len(values))


# --- style-transfer metrics ---------------------------------------------------

@dataclass(frozen=True)
class PairScore:
    """Per-pair evaluation record: binary style pass, similarity, fluency."""

    acc: int
    sim: float
    flu: float

    def __post_init__(self) -> None:
        if self.acc not in (0, 1):
            raise ValueError("acc must be 0 or 1")
        if not 0.0 <= self.sim <= 1.0 or not 0.0 <= self.flu <= 1.0:
            raise ValueError("sim and flu must lie in [0, 1]")


@dataclass(frozen=True)
class TstEval:
    """Per-pair scores plus their aggregates (all aggregates are means)."""

    pair_scores: tuple[PairScore, ...]
    sta: float
    cp: float
    fluency: float
    j: float

    @classmethod
    def from_pair_scores(cls, scores: Iterable[PairScore]) -> "TstEval":
        scores = tuple(scores)
        if not scores:
            raise ValueError("at least one pair required")
        n = len(scores)
        return cls(
            pair_scores=scores,
            sta=sum(s.acc for s in scores) / n,
            cp=sum(s.sim for s in scores) / n,
            fluency=sum(s.flu for s in scores) / n,
            j=sum(s.acc * s.sim * s.flu for s in scores) / n,
        )


def score_pairs(
    pairs: Sequence[tuple[str, str]],
    filter_cfg: FilterConfig,
    registry: Registry,
    cp_scorer: ContentScorer,
    fluency_scorer: FluencyScorer,
) -> TstEval:
    """Score (source, target) pairs into a TstEval.

    acc_i is 1 when the target earns a non-toxic stage-1 verdict under
    ``filter_cfg``; sim_i and flu_i come from the injected scorers.
    """
    if not pairs:
        raise ValueError("at least one pair required")
    scores = []
    for source, target in pairs:
        verdict = classify_text(target, filter_cfg, registry)
        scores.append(
            PairScore(
                acc=1 if verdict.label is Label.NON_TOXIC else 0,
                sim=min(1.0, max(0.0, cp_scorer(source, target))),
                flu=min(1.0, max(0.0, fluency_scorer(target))),
            )
        )
    return TstEval.from_pair_scores(scores)


def sta(pairs: Sequence[tuple[str, str]], filter_cfg: FilterConfig, registry: Registry) -> float:
    """Fraction of targets judged non-toxic by the stage-1 filter."""
    if not pairs:
        raise ValueError("at least one pair required")
    passed = sum(
        1
        for _, target in pairs
        if classify_text(target, filter_cfg, registry).label is Label.NON_TOXIC
    )
    return passed / len(pairs)


def content_preservation(pairs: Sequence[tuple[str, str]], scorer: ContentScorer) -> float:
    if not pairs:
        raise ValueError("at least one pair required")
    return sum(scorer(source, target) for source, target in pairs) / len(pairs)


def fluency(pairs: Sequence[tuple[str, str]], scorer: FluencyScorer) -> float:
    if not pairs:
        raise ValueError("at least one pair required")
    return sum(scorer(target) for _, target in pairs) / len(pairs)


def j_score(
    pairs: Sequence[tuple[str, str]],
    filter_cfg: FilterConfig,
    registry: Registry,
    cp_scorer: ContentScorer,
    fluency_scorer: FluencyScorer,
) -> float:
    """Mean over pairs of acc_i * sim_i * flu_i.

    The per-pair product is averaged (the standard detox-evaluation
    convention), not the product of the aggregate means; J <= STA always.
    """
    return score_pairs(pairs, filter_cfg, registry, cp_scorer, fluency_scorer).j


# --- reporting ----------------------------------------------------------------

@dataclass(frozen=True)
class MetricReport:
    """One evaluation run's numbers, ready for table or line-record output."""

    mode: str
    values: Mapping[str, float]
    per_class: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def to_records(self) -> list[dict]:
        records: list[dict] = [
            {"metric": name, "value": value} for name, value in sorted(self.values.items())
        ]
        for category in sorted(self.per_class):
            for name, value in sorted(self.per_class[category].items()):
                records.append({"metric": name, "category": category, "value": value})
        return records

    def to_table(self) -> str:
        lines = [f"mode: {self.mode}"]
        width = max((len(k) for k in self.values), default=6)
        for name, value in sorted(self.values.items()):
            lines.append(f"  {name:<{width}}  {value:.6f}")
        if self.per_class:
            lines.append("  per-category:")
            cat_width = max(len(c) for c in self.per_class)
            for category in sorted(self.per_class):
                cells = "  ".join(
                    f"{name}={value:.4f}"
                    for name, value in sorted(self.per_class[category].items())
                )
                lines.append(f"    {category:<{cat_width}}  {cells}")
        return "\n".join(lines)
