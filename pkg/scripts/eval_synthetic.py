#!/usr/bin/env python3
"""Exercise the full metric stack on a synthetic labeled set.

Generates a seeded synthetic corpus with known noise rates, scores a
simulated predictor against it, and prints binary, multi-label, agreement,
and style-transfer reports. A smoke check that every metric kernel runs on
realistic shapes; the numbers themselves are synthetic.

Usage: python3 scripts/eval_synthetic.py [--seed 7] [--items 2000]
"""

from __future__ import annotations

import argparse
import random

from reviewmod.metrics import (
    ConfusionCounts,
    MetricReport,
    MultiLabelEval,
    PairScore,
    RaterPair,
    TstEval,
    cohen_kappa,
    macro_f1,
    macro_mcc,
    mcc,
    per_category_f1,
    per_category_mcc,
    precision_recall_f1,
)

CATEGORIES = ["insult", "entitlement", "impatience"]


def synth_binary(rng: random.Random, items: int) -> ConfusionCounts:
    tp = fp = fn = tn = 0
    for _ in range(items):
        gold = rng.random() < 0.26
        flip = rng.random() < 0.08
        pred = gold ^ flip
        if gold and pred:
            tp += 1
        elif not gold and pred:
            fp += 1
        elif gold and not pred:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)


def synth_multilabel(rng: random.Random, items: int) -> MultiLabelEval:
    gold = {c: [rng.random() < 0.2 for _ in range(items)] for c in CATEGORIES}
    pred = {
        c: [g if rng.random() > 0.15 else not g for g in gold[c]] for c in CATEGORIES
    }
    return MultiLabelEval.from_labels(gold, pred)


def synth_raters(rng: random.Random, items: int) -> RaterPair:
    a = {c: [rng.random() < 0.3 for _ in range(items)] for c in CATEGORIES}
    b = {c: [x if rng.random() > 0.2 else not x for x in a[c]] for c in CATEGORIES}
    return RaterPair(rater_a=a, rater_b=b)


def synth_tst(rng: random.Random, items: int) -> TstEval:
    scores = [
        PairScore(
            acc=1 if rng.random() < 0.9 else 0,
            sim=rng.uniform(0.4, 1.0),
            flu=rng.uniform(0.6, 1.0),
        )
        for _ in range(items)
    ]
    return TstEval.from_pair_scores(scores)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--items", type=int, default=2000)
    args = parser.parse_args()
    rng = random.Random(args.seed)

    counts = synth_binary(rng, args.items)
    precision, recall, f1 = precision_recall_f1(counts)
    print(MetricReport(
        mode="binary",
        values={"precision": precision, "recall": recall, "f1": f1, "mcc": mcc(counts)},
    ).to_table())

    ml = synth_multilabel(rng, args.items)
    print(MetricReport(
        mode="multiclass",
        values={"macro_f1": macro_f1(ml), "macro_mcc": macro_mcc(ml)},
        per_class={
            c: {"f1": per_category_f1(ml)[c], "mcc": per_category_mcc(ml)[c]}
            for c in CATEGORIES
        },
    ).to_table())

    raters = synth_raters(rng, args.items)
    print(MetricReport(mode="agreement", values={"kappa": cohen_kappa(raters)}).to_table())

    tst = synth_tst(rng, args.items)
    print(MetricReport(
        mode="tst",
        values={"sta": tst.sta, "cp": tst.cp, "fluency": tst.fluency, "j": tst.j},
    ).to_table())
    assert tst.j <= tst.sta + 1e-12, "J must never exceed STA"


if __name__ == "__main__":
    main()
