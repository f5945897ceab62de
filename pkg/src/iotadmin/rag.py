"""End-to-end query pipeline: embed, retrieve, prompt, generate, record.

Two modes: NC sends the bare question to the generator; WC retrieves the
top-k chunks and injects them into the pinned prompt template. Every run is
captured as a RagRecord and appended to the record log.

Generation wire contract (canonical):
    POST {base}/v1/chat {"model": ..., "prompt": ...}
        -> {"text": ..., "usage": {"tokens": int?}}
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import requests

from . import resources
from .corpus import Chunk
from .errors import ConfigurationError, IntegrityError, TransportError
from .store import Hit, VectorStore

logger = logging.getLogger(__name__)

CONTEXT_PREAMBLE = "Answer the question based only on the following context:"
CHUNK_SEPARATOR = "\n\n---\n\n"

USE_CASES = ("device_management", "maintenance", "security_privacy",
             "troubleshooting", "device_setup")


class Mode(str, Enum):
    NC = "nc"
    WC = "wc"


@dataclass(frozen=True)
class QueryRequest:
    question: str
    mode: Mode
    k: int = 5
    use_case: str | None = None

    def validate(self) -> None:
        if not self.question:
            raise ValueError("question must be non-empty")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.use_case is not None and self.use_case not in USE_CASES:
            raise ValueError(f"unknown use_case: {self.use_case}")


@dataclass(frozen=True)
class RagRecord:
    request: QueryRequest
    retrieved: tuple[Hit, ...]
    prompt: str
    answer: str
    metrics: resources.ResourceMetrics
    model: str
    error: str | None = None
    timestamp: float = field(default_factory=time.time)

    def to_json(self) -> dict:
        return {
            "request": {
                "question": self.request.question,
                "mode": self.request.mode.value,
                "k": self.request.k,
                "use_case": self.request.use_case,
            },
            "retrieved": [{"chunk_id": h.chunk_id, "score": h.score} for h in self.retrieved],
            "prompt": self.prompt,
            "answer": self.answer,
            "metrics": self.metrics.to_json(),
            "model": self.model,
            "error": self.error,
            "timestamp": self.timestamp,
        }


def build_prompt(question: str, chunks: list[Chunk]) -> str:
    """Pinned template. Chunks appear in retrieval rank order; with no chunks
    the template degrades to the bare question form."""
    if not question:
        raise ValueError("question must be non-empty")
    tail = f"Question: {question}\nAnswer:"
    if not chunks:
        return tail
    context = CHUNK_SEPARATOR.join(c.text for c in chunks)
    return f"{CONTEXT_PREAMBLE}\n\n{context}\n\n{tail}"


@dataclass(frozen=True)
class GenerationResult:
    text: str
    tokens: int | None = None


class EchoGenerator:
    """Offline test double: echoes the last context line of the prompt.

    The prompt's literal last line is always the fixed "Answer:" sentinel,
    so echoing it verbatim would collapse NC and WC answers to a constant.
    Instead scaffolding lines are dropped and the final remaining line (the
    tail of the last retrieved chunk) is returned; with no context the
    question itself comes back.
    """

    model = "echo"

    def generate(self, prompt: str) -> GenerationResult:
        lines = prompt.splitlines()
        content = [ln for ln in lines
                   if ln and ln != "Answer:" and ln != "---"
                   and ln != CONTEXT_PREAMBLE and not ln.startswith("Question: ")]
        if content:
            return GenerationResult(text=content[-1])
        question = next((ln[len("Question: "):] for ln in lines
                         if ln.startswith("Question: ")), "")
        return GenerationResult(text=question)


class RemoteGenerator:
    """HTTP client for a chat-completion endpoint (canonical contract)."""

    def __init__(self, base_url: str, model: str, timeout: float = 120.0,
                 session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.timeout = timeout
        self.session = session or requests.Session()

    def generate(self, prompt: str) -> GenerationResult:
        url = f"{self.base_url}/v1/chat"
        last: Exception | None = None
        for attempt in range(1, 4):
            try:
                resp = self.session.post(url, json={"model": self.model, "prompt": prompt},
                                         timeout=self.timeout)
            except requests.RequestException as exc:
                last = exc
            else:
                if resp.status_code >= 500:
                    last = RuntimeError(f"server error {resp.status_code}")
                elif resp.status_code >= 400:
                    raise IntegrityError(f"chat endpoint rejected request: {resp.status_code}")
                else:
                    body = resp.json()
                    if "text" not in body:
                        raise IntegrityError("chat response missing 'text'")
                    usage = body.get("usage") or {}
                    tokens = usage.get("tokens")
                    return GenerationResult(text=body["text"],
                                            tokens=int(tokens) if tokens is not None else None)
            if attempt < 3:
                time.sleep(0.25 * (2 ** (attempt - 1)))
        raise TransportError(f"POST {url} failed: {last}", attempts=3)


def make_generator(endpoint: str, model: str):
    if endpoint == "stub":
        return EchoGenerator()
    return RemoteGenerator(endpoint, model)


@dataclass(frozen=True)
class QaPair:
    id: str
    use_case: str | None
    question: str
    reference: str


def load_qa_set(path: str | Path) -> list[QaPair]:
    """JSON Lines {"id", "use_case", "question", "reference"}; malformed
    lines raise with their line number."""
    pairs = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                pair = QaPair(id=str(rec["id"]), use_case=rec.get("use_case"),
                              question=rec["question"], reference=rec["reference"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"qa file {path} line {lineno}: {exc}") from exc
            if not pair.question or not pair.reference:
                raise ValueError(f"qa file {path} line {lineno}: empty question or reference")
            if pair.use_case is not None and pair.use_case not in USE_CASES:
                raise ValueError(f"qa file {path} line {lineno}: unknown use_case {pair.use_case}")
            pairs.append(pair)
    return pairs


class RecordLog:
    """Serialized append-only JSONL sink."""

    def __init__(self, path: str | Path | None):
        self.path = Path(path) if path is not None else None
        self._lock = threading.Lock()
        self.records: list[RagRecord] = []

    def append(self, record: RagRecord) -> None:
        with self._lock:
            self.records.append(record)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record.to_json(), ensure_ascii=False) + "\n")


class RagPipeline:
    def __init__(self, store: VectorStore, embedder, generator,
                 record_log: RecordLog | None = None, default_k: int = 5):
        self.store = store
        self.embedder = embedder
        self.generator = generator
        self.record_log = record_log or RecordLog(None)
        self.default_k = default_k

    def answer(self, request: QueryRequest) -> RagRecord:
        """Run one query end to end; failures are recorded, not dropped."""
        request.validate()
        retrieved: list[Hit] = []
        chunks: list[Chunk] = []
        if request.mode is Mode.WC:
            if len(self.store) == 0:
                raise ConfigurationError("store", "WC mode requires a non-empty store")
            qvec = self.embedder.embed([request.question])[0]
            retrieved = self.store.top_k(qvec, request.k)
            chunks = [self.store.get_chunk(h.chunk_id) for h in retrieved]
        prompt = build_prompt(request.question, chunks)
        result, err, metrics = resources.measure(lambda: self.generator.generate(prompt))
        record = RagRecord(
            request=request,
            retrieved=tuple(retrieved),
            prompt=prompt,
            answer=result.text if result is not None else "",
            metrics=metrics,
            model=getattr(self.generator, "model", "unknown"),
            error=None if err is None else f"{type(err).__name__}: {err}",
        )
        self.record_log.append(record)
        if err is not None:
            logger.warning("generation failed for %r: %s", request.question[:60], err)
        return record

    def run_benchmark(self, qa_set: list[QaPair], mode: Mode,
                      k: int | None = None) -> list[tuple[RagRecord, str]]:
        """One record per pair, input order preserved so NC/WC runs pair up."""
        if not qa_set:
            raise ValueError("qa_set must be non-empty")
        out = []
        for pair in qa_set:
            request = QueryRequest(question=pair.question, mode=mode,
                                   k=k or self.default_k, use_case=pair.use_case)
            out.append((self.answer(request), pair.reference))
        return out
