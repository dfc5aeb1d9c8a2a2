#!/usr/bin/env python3
"""Run a handful of review comments through the full pipeline, offline.

Usage: python3 scripts/demo_moderation.py [--config configs/demo.yaml]
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from reviewmod import CommentRecord, outcome_to_dict
from reviewmod.service import ModerationPipeline, load_service_config

SAMPLES = [
    "Looks good to me, just one nit on the variable naming.",
    "This code is garbage, what the hell were you thinking? Keep `parse()` as is.",
    "Are you an idiot? This breaks every caller.",
    "Nice catch, thanks for the quick fix!",
    "The helper `is_disgusting_for` needs a docstring.",
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--config", default=Path(__file__).resolve().parent.parent / "configs" / "demo.yaml"
    )
    args = parser.parse_args()

    cfg, registry, taxonomy = load_service_config(args.config)
    pipeline = ModerationPipeline(cfg, registry, taxonomy)

    for i, body in enumerate(SAMPLES, start=1):
        outcome = pipeline.moderate(CommentRecord(id=f"demo-{i}", body=body))
        doc = outcome_to_dict(outcome)
        print(f"--- demo-{i}: {body[:60]!r}")
        print(f"    verdict: {doc['verdict']['label']} "
              f"(confidence {doc['verdict']['confidence']:.3f})")
        if doc["assignment"]:
            print(f"    categories: {doc['assignment']['categories']}")
        if doc["rewrite"]:
            print(f"    rewrite: {doc['rewrite']['rewritten']!r}")
            print(f"    accepted: {doc['rewrite']['style_pass'] and doc['rewrite']['code_preserved']}")
    print()
    print(json.dumps({"taxonomy_version": taxonomy.version, "categories": len(taxonomy.categories)}))


if __name__ == "__main__":
    main()
