"""HTTP service exposing ingestion, querying, classification, evaluation,
alerts, and resource aggregates.

Validation errors come back as 400 with the offending field named; alerts
are pull-based (GET with a since-cursor) and fire only for non-Normal
predictions at or above the configured confidence threshold.
"""

from __future__ import annotations

import itertools
import json
import logging
import threading
import time
import uuid
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import classify as classify_mod
from . import corpus as corpus_mod
from . import resources, textmetrics
from .config import Config
from .embedding import make_embedder
from .errors import ConfigurationError, IotAdminError
from .rag import Mode, QueryRequest, RagPipeline, RecordLog, load_qa_set, make_generator
from .store import StoredEntry, VectorStore

logger = logging.getLogger(__name__)

NORMAL_CLASS = "Normal"


class DocumentsBody(BaseModel):
    dir: str = Field(min_length=1)


class QueryBody(BaseModel):
    question: str = Field(min_length=1)
    mode: str = Field(pattern="^(nc|wc)$")
    k: int | None = Field(default=None, ge=1)
    use_case: str | None = None


class ClassifyBody(BaseModel):
    texts: list[str] = Field(min_length=1)


class EvaluateBody(BaseModel):
    qa_path: str = Field(min_length=1)
    modes: list[str] = Field(min_length=1)


class ServiceState:
    def __init__(self, config: Config):
        config.validate()
        self.config = config
        store_path = Path(config.store_path)
        if store_path.exists():
            self.store = VectorStore.load(store_path)
            if self.store.dim != config.embed_dim:
                raise ConfigurationError(
                    "embed_dim",
                    f"store has dim {self.store.dim}, config says {config.embed_dim}")
        else:
            self.store = VectorStore(config.embed_dim, path=store_path)
        self.embedder = make_embedder(config.embed_endpoint, config.embed_dim)
        self.generator = make_generator(config.chat_endpoint, config.model_name)
        self.record_log = RecordLog(config.records_path)
        self.pipeline = RagPipeline(self.store, self.embedder, self.generator,
                                    record_log=self.record_log,
                                    default_k=config.default_k)
        self.nb_model = (classify_mod.NBModel.load(config.nb_model_path)
                         if config.nb_model_path else None)
        self.remote_classifier = (
            classify_mod.RemoteClassifier(config.classify_endpoint)
            if config.classify_endpoint and config.classify_endpoint != "stub" else None)
        self.alerts: list[dict] = []
        self.alert_cursor = itertools.count(1)
        self.reports: dict[str, dict] = {}
        self.lock = threading.Lock()

    def classify_texts(self, texts: list[str]) -> tuple[list[str], list[classify_mod.Prediction]]:
        if self.remote_classifier is not None:
            preds = self.remote_classifier.classify(texts)
            classes = sorted(preds[0].probs) if preds else []
            return classes, preds
        if self.nb_model is None:
            raise ConfigurationError("classify_endpoint",
                                     "no classifier configured (endpoint or nb_model_path)")
        preds = classify_mod.classify_rows(self.nb_model, texts)
        return list(self.nb_model.classes), preds

    def raise_alerts(self, texts: list[str], preds: list[classify_mod.Prediction]) -> None:
        threshold = self.config.alert_threshold
        with self.lock:
            for text, pred in zip(texts, preds):
                confidence = pred.probs[pred.label]
                if pred.label == NORMAL_CLASS or confidence < threshold:
                    continue
                self.alerts.append({
                    "id": f"alert-{next(self.alert_cursor)}",
                    "timestamp": time.time(),
                    "predicted_class": pred.label,
                    "confidence": confidence,
                    "row_text": text,
                })

    def flush(self) -> None:
        if len(self.store):
            self.store.persist()


def create_app(config: Config) -> FastAPI:
    state = ServiceState(config)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        state.flush()

    app = FastAPI(title="iotadmin", lifespan=lifespan)
    app.state.ctx = state
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        field = ".".join(str(p) for p in first.get("loc", []) if p != "body") or "body"
        return JSONResponse(status_code=400,
                            content={"error": {"field": field,
                                               "message": first.get("msg", "invalid request")}})

    @app.exception_handler(IotAdminError)
    async def on_domain_error(request: Request, exc: IotAdminError):
        status = 400 if isinstance(exc, (ValueError, ConfigurationError)) else 502
        return JSONResponse(status_code=status, content={"error": {"message": str(exc)}})

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "chunks": len(state.store)}

    @app.post("/v1/documents")
    def ingest(body: DocumentsBody):
        docs = corpus_mod.load_documents(body.dir)
        chunks = []
        for doc in docs:
            chunks.extend(corpus_mod.chunk_document(
                doc, state.config.chunk_size, state.config.chunk_overlap))
        new_chunks = [c for c in chunks if c.id not in state.store]
        added = 0
        if new_chunks:
            vectors = state.embedder.embed([c.text for c in new_chunks])
            added = state.store.upsert(
                [StoredEntry(c, v) for c, v in zip(new_chunks, vectors)])
        return {"added": added, "skipped": len(chunks) - added}

    @app.post("/v1/query")
    def query(body: QueryBody):
        request = QueryRequest(question=body.question, mode=Mode(body.mode),
                               k=body.k or state.config.default_k,
                               use_case=body.use_case)
        try:
            record = state.pipeline.answer(request)
        except ValueError as exc:
            return JSONResponse(status_code=400,
                                content={"error": {"field": "request", "message": str(exc)}})
        return record.to_json()

    @app.post("/v1/classify")
    def classify(body: ClassifyBody):
        classes, preds = state.classify_texts(body.texts)
        state.raise_alerts(body.texts, preds)
        return {
            "classes": classes,
            "labels": [p.label for p in preds],
            "probs": [[p.probs.get(c, 0.0) for c in classes] for p in preds],
        }

    @app.post("/v1/evaluate")
    def evaluate(body: EvaluateBody):
        for mode in body.modes:
            if mode not in ("nc", "wc"):
                return JSONResponse(status_code=400,
                                    content={"error": {"field": "modes",
                                                       "message": f"unknown mode {mode!r}"}})
        qa_set = load_qa_set(body.qa_path)
        report: dict = {"qa_path": body.qa_path, "model": state.config.model_name,
                        "meteor_variant": textmetrics.METEOR_VARIANT, "modes": {}}
        all_records = []
        for mode in body.modes:
            results = state.pipeline.run_benchmark(qa_set, Mode(mode))
            all_records.extend(r for r, _ in results)
            by_case: dict[str, list[dict]] = {}
            for record, reference in results:
                scores = textmetrics.score_pair(record.answer, reference, state.embedder)
                by_case.setdefault(record.request.use_case or "all", []).append(scores)
            report["modes"][mode] = {
                case: textmetrics.mean_scores(rows) for case, rows in by_case.items()}
        report["resources"] = [row.to_json() for row in resources.aggregate(all_records)]
        report_id = uuid.uuid4().hex[:12]
        with state.lock:
            state.reports[report_id] = report
        if state.config.reports_dir:
            out_dir = Path(state.config.reports_dir)
            out_dir.mkdir(parents=True, exist_ok=True)
            (out_dir / f"{report_id}.json").write_text(
                json.dumps(report, indent=2), encoding="utf-8")
        return {"report_id": report_id}

    @app.get("/v1/reports/{report_id}")
    def get_report(report_id: str):
        report = state.reports.get(report_id)
        if report is None:
            return JSONResponse(status_code=404,
                                content={"error": {"message": f"no report {report_id!r}"}})
        return report

    @app.get("/v1/alerts")
    def alerts(since: int = 0):
        with state.lock:
            fresh = state.alerts[since:]
            cursor = len(state.alerts)
        return {"alerts": fresh, "cursor": cursor}

    @app.get("/v1/metrics")
    def metrics():
        rows = resources.aggregate(state.record_log.records)
        return {"groups": [r.to_json() for r in rows],
                "table": resources.format_table(rows)}

    return app


def run(config: Config) -> None:  # pragma: no cover - exercised manually
    import uvicorn

    host, _, port = config.listen_address.rpartition(":")
    uvicorn.run(create_app(config), host=host, port=int(port))
