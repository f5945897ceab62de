"""Command-line interface.

Commands: ingest, query, eval, split, textualize, train-baseline, classify,
report, serve. Exit codes: 0 success, 1 operational failure, 2 usage error.
``--json`` switches stdout to machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import classify as classify_mod
from . import corpus as corpus_mod
from . import flows as flows_mod
from . import resources, textmetrics
from .config import Config, load_config
from .embedding import make_embedder
from .rag import Mode, QueryRequest, RagPipeline, RecordLog, load_qa_set, make_generator
from .store import StoredEntry, VectorStore


def _config_from_args(args) -> Config:
    return load_config(getattr(args, "config", None))


def _open_store(cfg: Config) -> VectorStore:
    path = Path(cfg.store_path)
    if path.exists():
        return VectorStore.load(path)
    return VectorStore(cfg.embed_dim, path=path)


def _pipeline(cfg: Config) -> RagPipeline:
    return RagPipeline(
        _open_store(cfg),
        make_embedder(cfg.embed_endpoint, cfg.embed_dim),
        make_generator(cfg.chat_endpoint, cfg.model_name),
        record_log=RecordLog(cfg.records_path),
        default_k=cfg.default_k,
    )


def cmd_ingest(args) -> int:
    cfg = _config_from_args(args)
    store = _open_store(cfg)
    embedder = make_embedder(cfg.embed_endpoint, cfg.embed_dim)
    docs = corpus_mod.load_documents(args.dir or cfg.corpus_dir)
    chunks = []
    for doc in docs:
        chunks.extend(corpus_mod.chunk_document(doc, cfg.chunk_size, cfg.chunk_overlap))
    new_chunks = [c for c in chunks if c.id not in store]
    added = 0
    if new_chunks:
        vectors = embedder.embed([c.text for c in new_chunks])
        added = store.upsert([StoredEntry(c, v) for c, v in zip(new_chunks, vectors)])
    elif len(store) == 0:
        store.persist()
    if args.json:
        print(json.dumps({"added": added, "skipped": len(chunks) - added}))
    else:
        print(f"{added} chunks added, {len(chunks) - added} skipped")
    return 0


def cmd_query(args) -> int:
    cfg = _config_from_args(args)
    pipeline = _pipeline(cfg)
    record = pipeline.answer(QueryRequest(
        question=args.question, mode=Mode(args.mode), k=args.k or cfg.default_k))
    if args.json:
        print(json.dumps(record.to_json(), ensure_ascii=False))
    else:
        print(record.answer)
        for hit in record.retrieved:
            chunk = pipeline.store.get_chunk(hit.chunk_id)
            print(f"  [{hit.score:.4f}] {chunk.source_id}:{chunk.page} {hit.chunk_id}")
    return 0


def cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    pipeline = _pipeline(cfg)
    embedder = pipeline.embedder
    qa_set = load_qa_set(args.qa)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    report: dict = {"model": cfg.model_name, "meteor_variant": textmetrics.METEOR_VARIANT,
                    "modes": {}}
    all_records = []
    for mode in modes:
        results = pipeline.run_benchmark(qa_set, Mode(mode), k=args.k)
        all_records.extend(r for r, _ in results)
        by_case: dict[str, list[dict]] = {}
        for record, reference in results:
            scores = textmetrics.score_pair(record.answer, reference, embedder)
            by_case.setdefault(record.request.use_case or "all", []).append(scores)
        report["modes"][mode] = {case: textmetrics.mean_scores(rows)
                                 for case, rows in by_case.items()}
    report["resources"] = [row.to_json() for row in resources.aggregate(all_records)]
    text = json.dumps(report, indent=2, ensure_ascii=False)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        if not args.json:
            print(f"report written to {args.out}")
    if args.json or not args.out:
        print(text)
    return 0


def cmd_split(args) -> int:
    cfg = _config_from_args(args)
    label = args.label_column or cfg.label_column
    if not label:
        raise ValueError("--label-column is required (or set label_column in config)")
    table = flows_mod.load_table(args.csv, label)
    train, test = flows_mod.split(table, ratio=args.ratio, seed=args.seed,
                                  stratified=not args.no_stratify)
    flows_mod.write_csv(train, args.train_out)
    flows_mod.write_csv(test, args.test_out)
    payload = {"total": len(table), "train": len(train), "test": len(test)}
    print(json.dumps(payload) if args.json
          else f"split {payload['total']} rows -> {payload['train']} train / {payload['test']} test")
    return 0


def cmd_textualize(args) -> int:
    cfg = _config_from_args(args)
    label = args.label_column or cfg.label_column
    if not label:
        raise ValueError("--label-column is required (or set label_column in config)")
    table = flows_mod.load_table(args.csv, label)
    policy_path = args.policy or cfg.feature_policy_path
    policy = (flows_mod.FeaturePolicy.from_file(policy_path) if policy_path
              else flows_mod.FeaturePolicy.default())
    table = flows_mod.apply_policy(table, policy)
    rows = flows_mod.textualize(table)
    flows_mod.write_textualized(rows, args.out)
    print(json.dumps({"rows": len(rows), "out": args.out}) if args.json
          else f"wrote {len(rows)} textualized rows to {args.out}")
    return 0


def cmd_train_baseline(args) -> int:
    rows = flows_mod.read_textualized(args.rows)
    model = classify_mod.train_nb(rows)
    model.save(args.out)
    print(json.dumps({"classes": model.classes, "out": args.out}) if args.json
          else f"trained {len(model.classes)}-class baseline -> {args.out}")
    return 0


def cmd_classify(args) -> int:
    if args.text:
        texts = [args.text]
    elif args.rows:
        texts = [r.text for r in flows_mod.read_textualized(args.rows)]
    else:
        raise ValueError("provide --text or --rows")
    if args.endpoint:
        preds = classify_mod.remote_classify(args.endpoint, texts)
    else:
        if not args.model:
            raise ValueError("provide --model (baseline file) or --endpoint")
        model = classify_mod.NBModel.load(args.model)
        preds = classify_mod.classify_rows(model, texts)
    if args.json:
        print(json.dumps([{"label": p.label, "probs": p.probs} for p in preds]))
    else:
        for text, pred in zip(texts, preds):
            print(f"{pred.label}\t{pred.probs[pred.label]:.4f}\t{text[:60]}")
    return 0


def cmd_report(args) -> int:
    rows = flows_mod.read_textualized(args.rows)
    model = classify_mod.NBModel.load(args.model)
    preds = classify_mod.classify_rows(model, [r.text for r in rows])
    report = classify_mod.evaluate(preds, [r.label for r in rows], model.classes)
    payload = report.to_json()
    classify_mod.validate_report(payload)
    text = json.dumps(payload, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        if not args.json:
            print(f"report written to {args.out}")
    if args.json or not args.out:
        print(text)
    return 0


def cmd_serve(args) -> int:
    from . import service

    cfg = _config_from_args(args)
    service.run(cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iotadmin",
                                     description="IoT admin Q&A and anomaly detection")
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="chunk and embed a document directory")
    p.add_argument("--dir", help="corpus directory (default: config corpus_dir)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("query", help="answer one question")
    p.add_argument("question")
    p.add_argument("--mode", choices=["nc", "wc"], default="wc")
    p.add_argument("-k", type=int, default=None)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="run a QA benchmark and report metrics")
    p.add_argument("--qa", required=True, help="QA set (JSON Lines)")
    p.add_argument("--modes", default="nc,wc")
    p.add_argument("-k", type=int, default=None)
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("split", help="deterministic train/test split of a flow CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--label-column")
    p.add_argument("--ratio", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("textualize", help="render flow rows as feature-value text")
    p.add_argument("--csv", required=True)
    p.add_argument("--label-column")
    p.add_argument("--policy", help="feature policy JSON (default: built-in drops)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_textualize)

    p = sub.add_parser("train-baseline", help="train the naive-Bayes baseline")
    p.add_argument("--rows", required=True, help="textualized JSON Lines")
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("classify", help="classify texts with the baseline or a remote model")
    p.add_argument("--model", help="baseline model JSON")
    p.add_argument("--endpoint", help="remote classify endpoint base URL")
    p.add_argument("--text")
    p.add_argument("--rows", help="textualized JSON Lines")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", help="evaluate the baseline on labeled rows")
    p.add_argument("--model", required=True)
    p.add_argument("--rows", required=True, help="labeled textualized JSON Lines")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
