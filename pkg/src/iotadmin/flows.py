"""Tabular traffic ingestion, feature policy, textualization, and splitting.

Rows stay raw strings end to end; the classifier consumes "name: value"
strings, so no binning or normalization happens here. Splits are seeded
splitmix64 permutations with per-class largest-remainder rounding, which
makes them reproducible across runs and implementations.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels

logger = logging.getLogger(__name__)

NUMERIC = "numeric"
CATEGORICAL = "categorical"
TEXT = "text"

NULL_RENDERING = "none"

# Default drops: hosts and full URIs overfit to one network, ARP source
# duplicates the IP host, raw payload bytes add noise.
DEFAULT_DROP_REASONS = {
    "http.request.full_uri": "high_cardinality",
    "ip.src_host": "high_cardinality",
    "ip.dst_host": "high_cardinality",
    "arp.src.proto_ipv4": "redundant",
    "tcp.payload": "raw_payload",
}

_LONG_VALUE = 40  # mean length above which a column is reported as free text


@dataclass(frozen=True)
class FeaturePolicy:
    drop: frozenset[str]
    reasons: dict[str, str] = field(default_factory=dict)

    @classmethod
    def default(cls) -> "FeaturePolicy":
        return cls(frozenset(DEFAULT_DROP_REASONS), dict(DEFAULT_DROP_REASONS))

    @classmethod
    def from_file(cls, path: str | Path) -> "FeaturePolicy":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        drop = data.get("drop", [])
        if not isinstance(drop, list):
            raise ValueError("policy file must carry a 'drop' list")
        reasons = data.get("reasons", {})
        return cls(frozenset(drop), {c: reasons.get(c, "high_cardinality") for c in drop})


@dataclass
class FlowTable:
    columns: list[tuple[str, str]]  # (name, kind)
    rows: list[tuple]               # values are str or None
    label_column: str

    @property
    def column_names(self) -> list[str]:
        return [name for name, _ in self.columns]

    def label_index(self) -> int:
        return self.column_names.index(self.label_column)

    def labels(self) -> list[str]:
        li = self.label_index()
        return [row[li] for row in self.rows]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class TextualizedRow:
    text: str
    label: str

    def to_json(self) -> dict:
        return {"text": self.text, "label": self.label}


def _infer_kind(values: list[str]) -> str:
    numeric = True
    for v in values:
        try:
            float(v)
        except ValueError:
            numeric = False
            break
    if numeric and values:
        return NUMERIC
    if values and sum(len(v) for v in values) / len(values) > _LONG_VALUE:
        return TEXT
    return CATEGORICAL


def load_table(path: str | Path, label_column: str) -> FlowTable:
    """Read an RFC-4180 CSV with a header row. Empty fields become nulls;
    columns that are null in every row are dropped (reason: null_only)."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, header row required") from None
        if label_column not in header:
            raise ValueError(f"{path}: label column {label_column!r} not among headers")
        raw_rows = []
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {rownum} has {len(row)} fields, expected {len(header)}")
            raw_rows.append(tuple(v if v != "" else None for v in row))

    keep_idx = []
    dropped = []
    for i, name in enumerate(header):
        non_null = [r[i] for r in raw_rows if r[i] is not None]
        if raw_rows and not non_null and name != label_column:
            dropped.append(name)
            continue
        keep_idx.append(i)
    if dropped:
        logger.info("dropped null-only columns: %s", ", ".join(dropped))

    columns = []
    for i in keep_idx:
        non_null = [r[i] for r in raw_rows if r[i] is not None]
        columns.append((header[i], _infer_kind(non_null) if non_null else CATEGORICAL))
    rows = [tuple(r[i] for i in keep_idx) for r in raw_rows]
    return FlowTable(columns=columns, rows=rows, label_column=label_column)


def apply_policy(table: FlowTable, policy: FeaturePolicy) -> FlowTable:
    """Drop the policy's columns; unknown names warn, the label never drops."""
    if table.label_column in policy.drop:
        raise ValueError("policy must not drop the label column")
    names = table.column_names
    missing = sorted(policy.drop - set(names))
    if missing:
        logger.warning("policy names absent columns: %s", ", ".join(missing))
    keep_idx = [i for i, name in enumerate(names) if name not in policy.drop]
    return FlowTable(
        columns=[table.columns[i] for i in keep_idx],
        rows=[tuple(r[i] for i in keep_idx) for r in table.rows],
        label_column=table.label_column,
    )


def textualize(table: FlowTable) -> list[TextualizedRow]:
    """Render each row as "name: value" pairs joined by single spaces, in
    column order, label excluded; nulls render as "name: none"."""
    names = table.column_names
    li = table.label_index()
    feature_idx = [i for i in range(len(names)) if i != li]
    if not feature_idx:
        raise ValueError("table has no non-label columns to textualize")
    out = []
    for row in table.rows:
        parts = [f"{names[i]}: {row[i] if row[i] is not None else NULL_RENDERING}"
                 for i in feature_idx]
        out.append(TextualizedRow(text=" ".join(parts), label=row[li] or NULL_RENDERING))
    return out


def write_textualized(rows: list[TextualizedRow], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row.to_json(), ensure_ascii=False) + "\n")


def read_textualized(path: str | Path) -> list[TextualizedRow]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                out.append(TextualizedRow(text=rec["text"], label=rec["label"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path} line {lineno}: {exc}") from exc
    return out


def _train_counts(class_sizes: dict[str, int], ratio: float) -> dict[str, int]:
    """floor(ratio * n_c) per class, then largest-remainder top-up so the
    global train size lands on round(ratio * N). Classes with one row go
    whole into train."""
    total = sum(class_sizes.values())
    target = math.floor(ratio * total + 0.5)
    counts = {}
    remainders = []
    forced = 0
    for cls, n in class_sizes.items():
        if n < 2:
            logger.warning("class %r has %d row(s); kept whole in train", cls, n)
            counts[cls] = n
            forced += n
            continue
        exact = ratio * n
        base = math.floor(exact)
        counts[cls] = base
        remainders.append((-(exact - base), cls))
    deficit = target - sum(counts.values())
    remainders.sort()  # largest remainder first, ties by class name
    i = 0
    while deficit > 0 and i < len(remainders):
        cls = remainders[i][1]
        if counts[cls] < class_sizes[cls]:
            counts[cls] += 1
            deficit -= 1
        i += 1
    if deficit != 0:
        logger.warning("split target off by %d after remainder rounding", deficit)
    return counts


def split(table: FlowTable, ratio: float = 0.8, seed: int = 0,
          stratified: bool = True) -> tuple[FlowTable, FlowTable]:
    """Deterministic train/test partition.

    Row order is permuted by sorting on a splitmix64 key stream seeded with
    ``seed``; under stratification each class contributes its own rounded
    share, which keeps per-class train fractions within one row of the
    ratio.
    """
    if not 0 < ratio < 1:
        raise ValueError("ratio must be in (0, 1)")
    n = len(table.rows)
    if n == 0:
        return (FlowTable(list(table.columns), [], table.label_column),
                FlowTable(list(table.columns), [], table.label_column))
    keys = _kernels.splitmix64_keys(seed, n)
    perm = np.lexsort((np.arange(n), keys))

    labels = table.labels()
    train_idx: list[int] = []
    test_idx: list[int] = []
    if stratified:
        class_sizes: dict[str, int] = {}
        for lab in labels:
            class_sizes[lab] = class_sizes.get(lab, 0) + 1
        counts = _train_counts(class_sizes, ratio)
        seen: dict[str, int] = {c: 0 for c in class_sizes}
        for i in perm:
            lab = labels[i]
            if seen[lab] < counts[lab]:
                train_idx.append(int(i))
                seen[lab] += 1
            else:
                test_idx.append(int(i))
    else:
        cut = math.floor(ratio * n + 0.5)
        train_idx = [int(i) for i in perm[:cut]]
        test_idx = [int(i) for i in perm[cut:]]

    def take(idx: list[int]) -> FlowTable:
        return FlowTable(columns=list(table.columns),
                         rows=[table.rows[i] for i in idx],
                         label_column=table.label_column)

    return take(train_idx), take(test_idx)


def write_csv(table: FlowTable, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.column_names)
        for row in table.rows:
            writer.writerow(["" if v is None else v for v in row])
