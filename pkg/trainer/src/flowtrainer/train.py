"""Seeded fine-tuning with a classification head sized to the label set.

Each epoch evaluates on the test split and emits accuracy plus macro and
weighted precision/recall/F1; the checkpoint with the best weighted F1 is
the one saved. ``scratch:`` model names build a small randomly initialized
encoder (offline); other names load pretrained weights from the hub.
"""

from __future__ import annotations

import json
import logging
import random
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import DataLoader, TensorDataset
from transformers import BertConfig, BertForSequenceClassification

from .data import EncodedDataset, EncodedSplit, TrainSpec, tokenize_dataset

logger = logging.getLogger(__name__)

SCRATCH_PRESETS = {
    "scratch:tiny": dict(hidden_size=64, num_hidden_layers=2,
                         num_attention_heads=2, intermediate_size=128),
    "scratch:small": dict(hidden_size=128, num_hidden_layers=2,
                          num_attention_heads=4, intermediate_size=256),
}


def seed_everything(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed)
    torch.manual_seed(seed)


def build_model(spec: TrainSpec, vocab_size: int, num_labels: int):
    if spec.model_name.startswith("scratch:"):
        preset = SCRATCH_PRESETS.get(spec.model_name)
        if preset is None:
            raise ValueError(f"unknown scratch preset {spec.model_name!r}; "
                             f"options: {sorted(SCRATCH_PRESETS)}")
        config = BertConfig(vocab_size=vocab_size, num_labels=num_labels,
                            max_position_embeddings=spec.max_length + 8,
                            pad_token_id=0, **preset)
        return BertForSequenceClassification(config)
    from transformers import AutoModelForSequenceClassification

    return AutoModelForSequenceClassification.from_pretrained(
        spec.model_name, num_labels=num_labels)


def _classification_metrics(golds: np.ndarray, preds: np.ndarray,
                            num_labels: int) -> dict:
    confusion = np.zeros((num_labels, num_labels), dtype=np.int64)
    for g, p in zip(golds, preds):
        confusion[g, p] += 1
    supports = confusion.sum(axis=1)
    predicted = confusion.sum(axis=0)
    tp = np.diag(confusion)
    with np.errstate(divide="ignore", invalid="ignore"):
        precision = np.where(predicted > 0, tp / np.maximum(predicted, 1), 0.0)
        recall = np.where(supports > 0, tp / np.maximum(supports, 1), 0.0)
        f1 = np.where(precision + recall > 0,
                      2 * precision * recall / np.maximum(precision + recall, 1e-12), 0.0)
    total = supports.sum()
    weights = supports / total
    return {
        "accuracy": float(tp.sum() / total),
        "macro_precision": float(precision.mean()),
        "macro_recall": float(recall.mean()),
        "macro_f1": float(f1.mean()),
        "weighted_precision": float((precision * weights).sum()),
        "weighted_recall": float((recall * weights).sum()),
        "weighted_f1": float((f1 * weights).sum()),
    }


@torch.no_grad()
def evaluate_split(model, split: EncodedSplit, num_labels: int,
                   batch_size: int = 64) -> dict:
    model.eval()
    preds = []
    for i in range(0, len(split), batch_size):
        logits = model(input_ids=split.input_ids[i:i + batch_size],
                       attention_mask=split.attention_mask[i:i + batch_size]).logits
        preds.append(logits.argmax(dim=-1))
    return _classification_metrics(split.labels.numpy(),
                                   torch.cat(preds).numpy(), num_labels)


def fine_tune(spec: TrainSpec, out_dir: str | Path,
              dataset: EncodedDataset | None = None) -> dict:
    """Train, evaluate per epoch, save the best checkpoint by weighted F1.

    Returns {"classes", "epochs": [per-epoch metrics], "best_epoch",
    "model_dir", "truncated_rows"} and writes metrics.json plus labels.json
    next to the saved model.
    """
    seed_everything(spec.seed)
    if dataset is None:
        dataset = tokenize_dataset(spec)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    num_labels = len(dataset.classes)
    model = build_model(spec, dataset.tokenizer.vocab_size, num_labels)
    optimizer = torch.optim.AdamW(model.parameters(), lr=spec.learning_rate)
    loader = DataLoader(
        TensorDataset(dataset.train.input_ids, dataset.train.attention_mask,
                      dataset.train.labels),
        batch_size=spec.batch_size, shuffle=True,
        generator=torch.Generator().manual_seed(spec.seed))

    history = []
    best_f1 = -1.0
    best_epoch = -1
    for epoch in range(1, spec.epochs + 1):
        model.train()
        epoch_loss = 0.0
        for input_ids, attention_mask, labels in loader:
            optimizer.zero_grad()
            out = model(input_ids=input_ids, attention_mask=attention_mask,
                        labels=labels)
            out.loss.backward()
            optimizer.step()
            epoch_loss += float(out.loss.detach())
        metrics = evaluate_split(model, dataset.test, num_labels)
        metrics["epoch"] = epoch
        metrics["train_loss"] = epoch_loss / max(len(loader), 1)
        history.append(metrics)
        logger.info("epoch %d: acc=%.4f weighted_f1=%.4f loss=%.4f", epoch,
                    metrics["accuracy"], metrics["weighted_f1"], metrics["train_loss"])
        if metrics["weighted_f1"] > best_f1:
            best_f1 = metrics["weighted_f1"]
            best_epoch = epoch
            model.save_pretrained(out_dir)
            dataset.tokenizer.save_pretrained(out_dir)

    (out_dir / "labels.json").write_text(
        json.dumps({"classes": dataset.classes, "label2id": dataset.label2id}),
        encoding="utf-8")
    result = {
        "classes": dataset.classes,
        "epochs": history,
        "best_epoch": best_epoch,
        "model_dir": str(out_dir),
        "truncated_rows": dataset.truncated_rows,
    }
    (out_dir / "metrics.json").write_text(json.dumps(result, indent=2),
                                          encoding="utf-8")
    return result
