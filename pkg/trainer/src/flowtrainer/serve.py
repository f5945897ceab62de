"""Serve a trained model behind the classify wire contract.

POST /v1/classify {"texts": [...]} ->
    {"classes": [...], "labels": [...], "probs": [[...], ...]}

One model instance; forward passes run under a lock so responses are
independent of request interleaving.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path

import torch
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field
from transformers import BertForSequenceClassification, PreTrainedTokenizerFast


class ClassifyBody(BaseModel):
    texts: list[str] = Field(min_length=1)


class ModelRuntime:
    def __init__(self, model_dir: str | Path, max_length: int = 512,
                 batch_size: int = 64):
        model_dir = Path(model_dir)
        labels = json.loads((model_dir / "labels.json").read_text(encoding="utf-8"))
        self.classes: list[str] = labels["classes"]
        self.tokenizer = PreTrainedTokenizerFast.from_pretrained(model_dir)
        self.model = BertForSequenceClassification.from_pretrained(model_dir)
        self.model.eval()
        self.max_length = min(max_length,
                              self.model.config.max_position_embeddings - 2)
        self.batch_size = batch_size
        self._lock = threading.Lock()

    @torch.no_grad()
    def classify(self, texts: list[str]) -> tuple[list[str], list[list[float]]]:
        with self._lock:
            probs: list[list[float]] = []
            for i in range(0, len(texts), self.batch_size):
                enc = self.tokenizer(texts[i:i + self.batch_size], padding=True,
                                     truncation=True, max_length=self.max_length,
                                     return_tensors="pt")
                logits = self.model(input_ids=enc["input_ids"],
                                    attention_mask=enc["attention_mask"]).logits
                probs.extend(torch.softmax(logits, dim=-1).tolist())
        labels = [self.classes[max(range(len(row)), key=row.__getitem__)]
                  for row in probs]
        return labels, probs


def create_app(model_dir: str | Path) -> FastAPI:
    runtime = ModelRuntime(model_dir)
    app = FastAPI(title="flowtrainer")
    app.state.runtime = runtime

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "classes": runtime.classes}

    @app.post("/v1/classify")
    def classify(body: ClassifyBody):
        try:
            labels, probs = runtime.classify(body.texts)
        except Exception as exc:  # malformed model dir and friends
            return JSONResponse(status_code=500, content={"error": str(exc)})
        return {"classes": runtime.classes, "labels": labels, "probs": probs}

    return app


def run(model_dir: str | Path, listen: str = "127.0.0.1:8742") -> None:  # pragma: no cover
    import uvicorn

    host, _, port = listen.rpartition(":")
    uvicorn.run(create_app(model_dir), host=host, port=int(port))
