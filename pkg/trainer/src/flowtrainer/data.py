"""Dataset loading and encoding.

Label ids come from the sorted unique training labels (stable across runs).
Model names starting with ``scratch:`` build a word-level tokenizer from the
training texts and a small randomly initialized encoder, which keeps the
whole flow runnable offline; any other name resolves through the hub.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import torch
from tokenizers import Tokenizer, models, pre_tokenizers, processors
from transformers import PreTrainedTokenizerFast

logger = logging.getLogger(__name__)

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


@dataclass
class TrainSpec:
    train_path: str
    test_path: str
    model_name: str = "scratch:small"
    max_length: int = 512
    batch_size: int = 32
    learning_rate: float = 2e-5
    epochs: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.max_length < 8:
            raise ValueError("max_length must be >= 8")


@dataclass
class EncodedSplit:
    input_ids: torch.Tensor
    attention_mask: torch.Tensor
    labels: torch.Tensor

    def __len__(self) -> int:
        return self.input_ids.shape[0]


@dataclass
class EncodedDataset:
    train: EncodedSplit
    test: EncodedSplit
    classes: list[str]
    label2id: dict[str, int]
    tokenizer: PreTrainedTokenizerFast
    truncated_rows: int = 0
    extras: dict = field(default_factory=dict)


def read_rows(path: str | Path) -> list[tuple[str, str]]:
    rows = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                rows.append((rec["text"], rec["label"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path} line {lineno}: {exc}") from exc
    if not rows:
        raise ValueError(f"{path}: no rows")
    return rows


def build_label_map(labels: list[str]) -> dict[str, int]:
    return {label: i for i, label in enumerate(sorted(set(labels)))}


def build_wordlevel_tokenizer(texts: list[str]) -> PreTrainedTokenizerFast:
    """Whitespace word-level vocabulary over the training texts."""
    vocab: dict[str, int] = {tok: i for i, tok in enumerate(SPECIALS)}
    for text in texts:
        for tok in text.split():
            if tok not in vocab:
                vocab[tok] = len(vocab)
    tok = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = pre_tokenizers.WhitespaceSplit()
    tok.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    return PreTrainedTokenizerFast(
        tokenizer_object=tok, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]")


def load_tokenizer(spec: TrainSpec, train_texts: list[str]) -> PreTrainedTokenizerFast:
    if spec.model_name.startswith("scratch:"):
        return build_wordlevel_tokenizer(train_texts)
    from transformers import AutoTokenizer

    return AutoTokenizer.from_pretrained(spec.model_name)


def _encode(tokenizer, texts: list[str], labels: list[int],
            max_length: int) -> EncodedSplit:
    enc = tokenizer(texts, padding="max_length", truncation=True,
                    max_length=max_length, return_tensors="pt")
    return EncodedSplit(input_ids=enc["input_ids"],
                        attention_mask=enc["attention_mask"],
                        labels=torch.tensor(labels, dtype=torch.long))


def tokenize_dataset(spec: TrainSpec) -> EncodedDataset:
    """Encode both splits to uniform ``max_length`` (pad + truncate)."""
    train_rows = read_rows(spec.train_path)
    test_rows = read_rows(spec.test_path)
    label2id = build_label_map([label for _, label in train_rows])
    unseen = sorted({label for _, label in test_rows} - set(label2id))
    if unseen:
        raise ValueError(f"test labels never seen in training: {unseen}")

    train_texts = [text for text, _ in train_rows]
    tokenizer = load_tokenizer(spec, train_texts)

    truncated = sum(1 for text, _ in train_rows + test_rows
                    if len(text.split()) + 2 > spec.max_length)
    if truncated:
        logger.warning("%d rows exceed max_length=%d and will be truncated",
                       truncated, spec.max_length)

    train = _encode(tokenizer, train_texts,
                    [label2id[label] for _, label in train_rows], spec.max_length)
    test = _encode(tokenizer, [text for text, _ in test_rows],
                   [label2id[label] for _, label in test_rows], spec.max_length)
    classes = sorted(label2id, key=label2id.get)
    return EncodedDataset(train=train, test=test, classes=classes,
                          label2id=label2id, tokenizer=tokenizer,
                          truncated_rows=truncated)
