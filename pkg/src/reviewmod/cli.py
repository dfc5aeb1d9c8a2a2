"""Operations front-end: serve, moderate files, evaluate, split, build corpora.

Exit codes: 0 success, 1 per-item failures when --strict, 2 config error,
3 environment error (such as a port already in use).
"""

from __future__ import annotations

import json
import socket
import sys
from pathlib import Path
from typing import Optional

import click

from .backends.base import Registry
from .backends.lexicon import LexiconBackend
from .corpus import (
    CorpusFormatError,
    holdout_split,
    ingest,
    stratified_kfold,
    write_split,
)
from .errors import ConfigError, StageError
from .filtering import FilterConfig
from .metrics import (
    ConfusionCounts,
    MetricReport,
    MultiLabelEval,
    macro_f1,
    macro_mcc,
    mcc,
    per_category_f1,
    per_category_mcc,
    precision_recall_f1,
    score_pairs,
)
from .records import Label
from .reframer import build_parallel_corpus
from .scorers import bag_cosine_similarity, rule_based_fluency
from .service import build_service, load_service_config

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2
EXIT_ENV = 3


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main() -> None:
    """Moderation gateway and corpus/evaluation tooling."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--host", default=None, help="Override the configured listen host.")
@click.option("--port", default=None, type=int, help="Override the configured port.")
def serve(config_path: str, host: Optional[str], port: Optional[int]) -> None:
    """Run the moderation gateway until interrupted."""
    try:
        gateway_cfg, registry, taxonomy = load_service_config(config_path)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    from .gateway import create_app
    from .service import ModerationPipeline, ModerationService

    service = ModerationService(ModerationPipeline(gateway_cfg, registry, taxonomy))
    app = create_app(service)
    bind_host = host or gateway_cfg.host
    bind_port = port if port is not None else gateway_cfg.port

    # probe the port first: uvicorn buries bind failures in its own logging
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((bind_host, bind_port))
    except OSError as exc:
        _fail(EXIT_ENV, f"cannot listen on {bind_host}:{bind_port}: {exc}")
    finally:
        probe.close()

    import uvicorn

    click.echo(f"listening on http://{bind_host}:{bind_port}")
    uvicorn.run(app, host=bind_host, port=bind_port, log_level="warning")


def _iter_comment_lines(path: Path):
    """Yield (line_no, id, body, error) for each nonblank input line."""
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                yield line_no, None, None, f"invalid JSON: {exc}"
                continue
            if not isinstance(doc, dict) or not doc.get("id") or not str(doc.get("body", "")).strip():
                yield line_no, doc.get("id") if isinstance(doc, dict) else None, None, "missing id or body"
                continue
            yield line_no, str(doc["id"]), str(doc["body"]), None


@main.command("moderate-file")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--want-rewrite/--no-rewrite", default=True)
@click.option("--strict", is_flag=True, help="Exit 1 when any line failed.")
def moderate_file(
    config_path: str, in_path: str, out_path: str, want_rewrite: bool, strict: bool
) -> None:
    """Moderate a line-record file; one outcome per line, order preserved."""
    try:
        gateway_cfg, registry, taxonomy = load_service_config(config_path)
        service = build_service(gateway_cfg, registry, taxonomy)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))

    summary = {"total": 0, "toxic": 0, "rewritten": 0, "errors": 0}
    with Path(out_path).open("w", encoding="utf-8") as out:
        for line_no, comment_id, body, line_error in _iter_comment_lines(Path(in_path)):
            summary["total"] += 1
            if line_error is not None:
                summary["errors"] += 1
                record = {"line": line_no, "id": comment_id, "error": line_error}
                out.write(json.dumps(record, sort_keys=True) + "\n")
                continue
            try:
                doc, cached = service.moderate_text(
                    body, want_rewrite=want_rewrite, comment_id=comment_id
                )
            except StageError as exc:
                summary["errors"] += 1
                record = {
                    "line": line_no,
                    "id": comment_id,
                    "error": str(exc),
                    "stage": exc.stage,
                }
                out.write(json.dumps(record, sort_keys=True) + "\n")
                continue
            doc = dict(doc)
            doc["cached"] = cached
            if doc["verdict"]["label"] == Label.TOXIC.value:
                summary["toxic"] += 1
            if doc.get("rewrite"):
                summary["rewritten"] += 1
            out.write(json.dumps(doc, sort_keys=True) + "\n")
    click.echo(json.dumps(summary, sort_keys=True))
    if strict and summary["errors"]:
        sys.exit(EXIT_PARTIAL)


def _load_id_map(path: str, value_key: str) -> dict[str, object]:
    table: dict[str, object] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        doc = json.loads(line)
        if "id" not in doc or value_key not in doc:
            raise ConfigError(f"{path}:{line_no}: needs id and {value_key!r}")
        table[str(doc["id"])] = doc[value_key]
    return table


def _require_aligned(gold: dict, pred: dict) -> list[str]:
    missing = sorted(set(gold) ^ set(pred))
    if missing:
        raise ConfigError(f"id mismatch between gold and predictions: {missing[:10]}")
    return sorted(gold)


@main.command("eval")
@click.option("--mode", type=click.Choice(["binary", "multiclass", "tst"]), required=True)
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--predictions", "pred_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, type=click.Path())
@click.option("--threshold", default=0.5, show_default=True, help="Filter threshold for tst style accuracy.")
def eval_cmd(mode: str, gold_path: str, pred_path: str, out_path: Optional[str], threshold: float) -> None:
    """Score predictions against gold labels and print a metric report."""
    try:
        report = _run_eval(mode, gold_path, pred_path, threshold)
    except (ConfigError, CorpusFormatError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    click.echo(report.to_table())
    if out_path:
        with Path(out_path).open("w", encoding="utf-8") as fh:
            for record in report.to_records():
                fh.write(json.dumps(record, sort_keys=True) + "\n")


def _run_eval(mode: str, gold_path: str, pred_path: str, threshold: float) -> MetricReport:
    if mode == "binary":
        gold = _load_id_map(gold_path, "label")
        pred = _load_id_map(pred_path, "label")
        ids = _require_aligned(gold, pred)
        tp = fp = fn = tn = 0
        for i in ids:
            g = gold[i] == Label.TOXIC.value
            p = pred[i] == Label.TOXIC.value
            if g and p:
                tp += 1
            elif not g and p:
                fp += 1
            elif g and not p:
                fn += 1
            else:
                tn += 1
        counts = ConfusionCounts(tp=tp, fp=fp, fn=fn, tn=tn)
        precision, recall, f1 = precision_recall_f1(counts)
        return MetricReport(
            mode="binary",
            values={
                "precision": precision,
                "recall": recall,
                "f1": f1,
                "mcc": mcc(counts),
            },
        )
    if mode == "multiclass":
        gold = _load_id_map(gold_path, "categories")
        pred = _load_id_map(pred_path, "categories")
        ids = _require_aligned(gold, pred)
        gold_sets = {i: frozenset(gold[i]) for i in ids}
        pred_sets = {i: frozenset(pred[i]) for i in ids}
        categories = sorted(set().union(*gold_sets.values(), *pred_sets.values()) or {"none"})
        gold_cols = {c: [c in gold_sets[i] for i in ids] for c in categories}
        pred_cols = {c: [c in pred_sets[i] for i in ids] for c in categories}
        evaluation = MultiLabelEval.from_labels(gold_cols, pred_cols)
        return MetricReport(
            mode="multiclass",
            values={"macro_f1": macro_f1(evaluation), "macro_mcc": macro_mcc(evaluation)},
            per_class={
                c: {"f1": per_category_f1(evaluation)[c], "mcc": per_category_mcc(evaluation)[c]}
                for c in categories
            },
        )
    # tst: gold carries toxic sources, predictions carry rewrites
    gold = _load_id_map(gold_path, "body")
    pred = _load_id_map(pred_path, "rewrite")
    ids = _require_aligned(gold, pred)
    registry = Registry()
    registry.register_score(LexiconBackend())
    filter_cfg = FilterConfig(backend_id="lexicon", threshold=threshold)
    pairs = [(str(gold[i]), str(pred[i])) for i in ids]
    evaluation = score_pairs(
        pairs, filter_cfg, registry, bag_cosine_similarity, rule_based_fluency
    )
    return MetricReport(
        mode="tst",
        values={
            "sta": evaluation.sta,
            "cp": evaluation.cp,
            "fluency": evaluation.fluency,
            "j": evaluation.j,
        },
    )


@main.command()
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--format", "corpus_format", default="line-records", type=click.Choice(["line-records", "comma-separated"]))
@click.option("--scheme", type=click.Choice(["kfold", "holdout"]), required=True)
@click.option("--k", default=10, show_default=True)
@click.option("--ratios", default="8:1:1", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def split(in_path: str, corpus_format: str, scheme: str, k: int, ratios: str, seed: int, out_path: str) -> None:
    """Write a stratified split assignment for a labeled corpus."""
    try:
        corpus = ingest(in_path, format=corpus_format)
        if scheme == "kfold":
            assignment = stratified_kfold(corpus, k=k, seed=seed)
        else:
            parts = tuple(float(r) for r in ratios.split(":"))
            assignment = holdout_split(corpus, ratios=parts, seed=seed)
    except (CorpusFormatError, ConfigError, ValueError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    write_split(assignment, out_path)
    sizes = {tag: len(ids) for tag, ids in sorted(assignment.partitions().items())}
    click.echo(json.dumps({"scheme": assignment.scheme, "seed": seed, "sizes": sizes}, sort_keys=True))


@main.command("build-corpus")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--in", "in_path", required=True, type=click.Path(exists=True))
@click.option("--teacher", "teacher_id", required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--rejects", "rejects_path", default=None, type=click.Path())
@click.option("--checkpoint", "checkpoint_path", default=None, type=click.Path())
def build_corpus(
    config_path: str,
    in_path: str,
    teacher_id: str,
    out_path: str,
    rejects_path: Optional[str],
    checkpoint_path: Optional[str],
) -> None:
    """Rewrite a toxic corpus with a teacher backend into parallel pairs."""
    try:
        gateway_cfg, registry, _ = load_service_config(config_path)
        corpus = ingest(in_path)
    except (ConfigError, CorpusFormatError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    toxic = [r.comment for r in corpus.records if r.label is Label.TOXIC]
    try:
        pairs = build_parallel_corpus(
            toxic,
            teacher_id,
            gateway_cfg.reframe,
            registry,
            out_path=Path(out_path),
            rejects_path=Path(rejects_path) if rejects_path else None,
            checkpoint_path=Path(checkpoint_path) if checkpoint_path else None,
        )
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    click.echo(
        json.dumps(
            {"accepted": len(pairs), "input_toxic": len(toxic)}, sort_keys=True
        )
    )


if __name__ == "__main__":
    main()
