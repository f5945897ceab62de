"""Flow classification and its evaluation artifacts.

A multinomial naive-Bayes baseline keeps the whole pipeline runnable on a
desk (textualize -> classify -> report); a remote fine-tuned model plugs in
behind the same Prediction interface via the classify wire contract:

    POST {base}/v1/classify {"texts": [...]}
        -> {"classes": [...], "labels": [...], "probs": [[...], ...]}

Reports carry per-class precision/recall/F1/support, macro and weighted
averages, accuracy, the confusion matrix, and one-vs-rest ROC-AUC, all on
the percent scale.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests

from .errors import IntegrityError, TransportError
from .flows import TextualizedRow

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Prediction:
    label: str
    probs: dict[str, float]


@dataclass
class NBModel:
    """Multinomial naive Bayes over whitespace tokens, Laplace alpha = 1."""

    classes: list[str]
    log_priors: dict[str, float]
    log_likelihoods: dict[str, dict[str, float]]
    vocab: set[str]
    degenerate: bool = False

    def to_json(self) -> dict:
        return {
            "classes": self.classes,
            "log_priors": self.log_priors,
            "log_likelihoods": self.log_likelihoods,
            "vocab": sorted(self.vocab),
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_json(cls, data: dict) -> "NBModel":
        return cls(
            classes=list(data["classes"]),
            log_priors=dict(data["log_priors"]),
            log_likelihoods={c: dict(v) for c, v in data["log_likelihoods"].items()},
            vocab=set(data["vocab"]),
            degenerate=bool(data.get("degenerate", False)),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NBModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def train_nb(rows: list[TextualizedRow]) -> NBModel:
    """Count tokens per class and smooth with alpha = 1 over a shared vocab."""
    if not rows:
        raise ValueError("training rows must be non-empty")
    class_docs: dict[str, int] = {}
    token_counts: dict[str, dict[str, int]] = {}
    vocab: set[str] = set()
    for row in rows:
        class_docs[row.label] = class_docs.get(row.label, 0) + 1
        counts = token_counts.setdefault(row.label, {})
        for tok in row.text.split():
            vocab.add(tok)
            counts[tok] = counts.get(tok, 0) + 1
    classes = sorted(class_docs)
    degenerate = len(classes) < 2
    if degenerate:
        logger.warning("training set has a single class; model flagged degenerate")
    total_docs = len(rows)
    v = len(vocab)
    log_priors = {c: math.log(class_docs[c] / total_docs) for c in classes}
    log_likelihoods: dict[str, dict[str, float]] = {}
    for c in classes:
        counts = token_counts.get(c, {})
        denom = sum(counts.values()) + v
        log_likelihoods[c] = {t: math.log((counts.get(t, 0) + 1) / denom) for t in vocab}
    return NBModel(classes=classes, log_priors=log_priors,
                   log_likelihoods=log_likelihoods, vocab=vocab, degenerate=degenerate)


def predict_nb(model: NBModel, text: str) -> Prediction:
    """Softmax over per-class log posteriors; unseen tokens are skipped and
    an empty token list falls back to the priors."""
    if model.degenerate:
        raise ValueError("model is degenerate (single class); cannot predict")
    tokens = [t for t in text.split() if t in model.vocab]
    log_posts = []
    for c in model.classes:
        ll = model.log_likelihoods[c]
        log_posts.append(model.log_priors[c] + sum(ll[t] for t in tokens))
    peak = max(log_posts)
    unnorm = [math.exp(lp - peak) for lp in log_posts]
    z = sum(unnorm)
    probs = {c: u / z for c, u in zip(model.classes, unnorm)}
    best = max(range(len(model.classes)), key=lambda i: (unnorm[i], -i))
    return Prediction(label=model.classes[best], probs=probs)


def classify_rows(model: NBModel, texts: list[str]) -> list[Prediction]:
    return [predict_nb(model, t) for t in texts]


# ---------------------------------------------------------------------------
# Remote classifier (wire contract client)

def parse_classify_payload(body: dict, expected_texts: int) -> list[Prediction]:
    """Validate a classify response body and convert it to Predictions."""
    classes = body.get("classes")
    labels = body.get("labels")
    probs = body.get("probs")
    if not isinstance(classes, list) or not classes:
        raise IntegrityError("classify response missing 'classes'")
    if not isinstance(labels, list) or len(labels) != expected_texts:
        raise IntegrityError("classify response must carry one label per text")
    if not isinstance(probs, list) or len(probs) != expected_texts:
        raise IntegrityError("classify response must carry one prob row per text")
    out = []
    for label, row in zip(labels, probs):
        if not isinstance(row, list) or len(row) != len(classes):
            raise IntegrityError("prob row length must match the class list")
        total = sum(row)
        if not math.isclose(total, 1.0, abs_tol=1e-6):
            raise IntegrityError(f"prob row sums to {total}, expected 1")
        if label not in classes:
            raise IntegrityError(f"label {label!r} not in class list")
        out.append(Prediction(label=label, probs=dict(zip(classes, row))))
    return out


class RemoteClassifier:
    def __init__(self, base_url: str, timeout: float = 60.0,
                 expected_classes: list[str] | None = None,
                 session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.expected_classes = expected_classes
        self.session = session or requests.Session()

    def classify(self, texts: list[str]) -> list[Prediction]:
        if not texts:
            raise ValueError("texts must be non-empty")
        url = f"{self.base_url}/v1/classify"
        last: Exception | None = None
        for attempt in range(1, 4):
            try:
                resp = self.session.post(url, json={"texts": texts}, timeout=self.timeout)
            except requests.RequestException as exc:
                last = exc
            else:
                if resp.status_code >= 500:
                    last = RuntimeError(f"server error {resp.status_code}")
                elif resp.status_code >= 400:
                    raise IntegrityError(f"classify endpoint rejected request: {resp.status_code}")
                else:
                    body = resp.json()
                    preds = parse_classify_payload(body, len(texts))
                    if self.expected_classes is not None \
                            and sorted(body["classes"]) != sorted(self.expected_classes):
                        raise IntegrityError("endpoint class set does not match expected labels")
                    return preds
            if attempt < 3:
                time.sleep(0.25 * (2 ** (attempt - 1)))
        raise TransportError(f"POST {url} failed: {last}", attempts=3)


def remote_classify(base_url: str, texts: list[str],
                    expected_classes: list[str] | None = None) -> list[Prediction]:
    return RemoteClassifier(base_url, expected_classes=expected_classes).classify(texts)


# ---------------------------------------------------------------------------
# ROC-AUC

def roc_auc_binary(scores: list[float], positives: list[bool]) -> float:
    """Probability a positive outranks a negative, ties counted half.

    Computed over unique score thresholds with integer arithmetic, so the
    result is exactly the pair-counting statistic.
    """
    if len(scores) != len(positives):
        raise ValueError("scores and positives must align")
    n_pos = sum(1 for p in positives if p)
    n_neg = len(positives) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC undefined without both classes")
    by_score: dict[float, list[int]] = {}
    for s, p in zip(scores, positives):
        grp = by_score.setdefault(s, [0, 0])
        grp[0 if p else 1] += 1
    wins2 = 0  # twice the pair count, so ties stay integral
    neg_below = 0
    for s in sorted(by_score):
        pos_g, neg_g = by_score[s]
        wins2 += pos_g * (2 * neg_below + neg_g)
        neg_below += neg_g
    return wins2 / (2 * n_pos * n_neg)


# ---------------------------------------------------------------------------
# Evaluation report

@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    classes: list[str]
    per_class: dict[str, ClassMetrics]
    accuracy: float
    macro_avg: tuple[float, float, float]
    weighted_avg: tuple[float, float, float]
    confusion: list[list[int]]
    roc_auc: dict[str, float | None]
    flags: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "classes": self.classes,
            "per_class": {c: {"precision": m.precision, "recall": m.recall,
                              "f1": m.f1, "support": m.support}
                          for c, m in self.per_class.items()},
            "accuracy": self.accuracy,
            "macro_avg": {"precision": self.macro_avg[0], "recall": self.macro_avg[1],
                          "f1": self.macro_avg[2]},
            "weighted_avg": {"precision": self.weighted_avg[0], "recall": self.weighted_avg[1],
                             "f1": self.weighted_avg[2]},
            "confusion": self.confusion,
            "roc_auc": self.roc_auc,
            "flags": self.flags,
        }


def evaluate(predictions: list[Prediction], golds: list[str],
             classes: list[str]) -> EvalReport:
    """Assemble the full report; all rates on the percent scale.

    Never-predicted classes get precision 0 with a zero-division flag; AUC
    for a class missing either side of the one-vs-rest split is None with a
    flag.
    """
    if len(predictions) != len(golds):
        raise ValueError(f"{len(predictions)} predictions vs {len(golds)} golds")
    unknown = sorted(set(golds) - set(classes))
    if unknown:
        raise ValueError(f"gold labels outside class list: {unknown}")
    idx = {c: i for i, c in enumerate(classes)}
    n = len(classes)
    confusion = [[0] * n for _ in range(n)]
    for pred, gold in zip(predictions, golds):
        confusion[idx[gold]][idx[pred.label]] += 1

    flags: list[str] = []
    per_class: dict[str, ClassMetrics] = {}
    total = len(golds)
    correct = sum(confusion[i][i] for i in range(n))
    for i, c in enumerate(classes):
        support = sum(confusion[i])
        predicted = sum(confusion[r][i] for r in range(n))
        tp = confusion[i][i]
        if predicted == 0:
            precision = 0.0
            flags.append(f"zero_division:{c}:precision")
        else:
            precision = 100.0 * tp / predicted
        if support == 0:
            recall = 0.0
            flags.append(f"zero_division:{c}:recall")
        else:
            recall = 100.0 * tp / support
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class[c] = ClassMetrics(precision, recall, f1, support)

    macro = tuple(sum(getattr(per_class[c], f) for c in classes) / n
                  for f in ("precision", "recall", "f1"))
    weighted = tuple(
        sum(getattr(per_class[c], f) * per_class[c].support for c in classes) / total
        for f in ("precision", "recall", "f1"))

    roc: dict[str, float | None] = {}
    for c in classes:
        scores = [p.probs.get(c, 0.0) for p in predictions]
        pos = [g == c for g in golds]
        if not any(pos) or all(pos):
            roc[c] = None
            flags.append(f"auc_undefined:{c}")
        else:
            roc[c] = roc_auc_binary(scores, pos)

    return EvalReport(
        classes=list(classes),
        per_class=per_class,
        accuracy=100.0 * correct / total,
        macro_avg=macro,                # type: ignore[arg-type]
        weighted_avg=weighted,          # type: ignore[arg-type]
        confusion=confusion,
        roc_auc=roc,
        flags=flags,
    )


# JSON schema for serialized reports (jsonschema draft 2020-12 subset).
_AVG = {
    "type": "object",
    "required": ["precision", "recall", "f1"],
    "properties": {"precision": {"type": "number"}, "recall": {"type": "number"},
                   "f1": {"type": "number"}},
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["classes", "per_class", "accuracy", "macro_avg", "weighted_avg",
                 "confusion", "roc_auc"],
    "properties": {
        "classes": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "per_class": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["precision", "recall", "f1", "support"],
                "properties": {
                    "precision": {"type": "number", "minimum": 0, "maximum": 100},
                    "recall": {"type": "number", "minimum": 0, "maximum": 100},
                    "f1": {"type": "number", "minimum": 0, "maximum": 100},
                    "support": {"type": "integer", "minimum": 0},
                },
            },
        },
        "accuracy": {"type": "number", "minimum": 0, "maximum": 100},
        "macro_avg": _AVG,
        "weighted_avg": _AVG,
        "confusion": {"type": "array",
                      "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        "roc_auc": {"type": "object",
                    "additionalProperties": {"type": ["number", "null"],
                                             "minimum": 0, "maximum": 1}},
        "flags": {"type": "array", "items": {"type": "string"}},
    },
}


def validate_report(payload: dict) -> None:
    """Raise if a serialized report violates the schema or its invariants."""
    import jsonschema

    jsonschema.validate(payload, REPORT_SCHEMA)
    classes = payload["classes"]
    if sorted(payload["per_class"]) != sorted(classes):
        raise IntegrityError("per_class keys must match the class list")
    confusion = payload["confusion"]
    if len(confusion) != len(classes) or any(len(r) != len(classes) for r in confusion):
        raise IntegrityError("confusion matrix must be square in class order")
    for i, c in enumerate(classes):
        if sum(confusion[i]) != payload["per_class"][c]["support"]:
            raise IntegrityError(f"confusion row {c} does not sum to its support")
