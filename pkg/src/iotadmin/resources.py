"""Per-call resource metrics and their aggregation.

Captures wall-clock execution time, token count, and response size for each
generation call. Token counts come from the endpoint's usage field when
present, otherwise from a whitespace count of the answer. Memory and GPU
columns are intentionally reported as "n/a": their measurement is hardware-
and process-specific, so only the table layout is preserved.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Callable

logger = logging.getLogger(__name__)

SERVER_REPORTED = "server_reported"
WHITESPACE_FALLBACK = "whitespace_fallback"

NA = "n/a"


@dataclass(frozen=True)
class ResourceMetrics:
    execution_time_s: float
    tokens: int
    response_bytes: int
    token_source: str

    def to_json(self) -> dict:
        return {
            "execution_time_s": self.execution_time_s,
            "tokens": self.tokens,
            "response_bytes": self.response_bytes,
            "token_source": self.token_source,
        }


def metrics_for(answer_text: str, elapsed_s: float,
                server_tokens: int | None = None) -> ResourceMetrics:
    if server_tokens is not None:
        tokens, source = int(server_tokens), SERVER_REPORTED
    else:
        tokens, source = len(answer_text.split()), WHITESPACE_FALLBACK
    return ResourceMetrics(
        execution_time_s=elapsed_s,
        tokens=tokens,
        response_bytes=len(answer_text.encode("utf-8")),
        token_source=source,
    )


def measure(call: Callable[[], object]):
    """Run exactly one generation call under timing.

    Returns (result, error, metrics). A failing call still yields metrics
    (empty answer, elapsed time); the error is handed back for the caller to
    flag on the record.
    """
    t0 = time.perf_counter()
    result, error = None, None
    try:
        result = call()
    except Exception as exc:  # recorded, never swallowed silently
        error = exc
    elapsed = time.perf_counter() - t0
    text = getattr(result, "text", "") if result is not None else ""
    usage = getattr(result, "tokens", None) if result is not None else None
    return result, error, metrics_for(text, elapsed, usage)


@dataclass(frozen=True)
class AggregateRow:
    model: str
    mode: str
    count: int
    mean_execution_time_s: float
    mean_tokens: float
    mean_response_bytes: float
    token_sources: dict

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "mode": self.mode,
            "count": self.count,
            "mean_execution_time_s": self.mean_execution_time_s,
            "memory_usage_mb": NA,
            "gpu_utilization_pct": NA,
            "mean_tokens": self.mean_tokens,
            "mean_response_bytes": self.mean_response_bytes,
            "token_sources": self.token_sources,
        }


def aggregate(records) -> list[AggregateRow]:
    """Arithmetic means per (model, mode) over RagRecord-like objects."""
    groups: dict[tuple[str, str], list] = {}
    for rec in records:
        groups.setdefault((rec.model, rec.request.mode.value), []).append(rec)
    rows = []
    for (model, mode), recs in sorted(groups.items()):
        if not recs:  # unreachable by construction; guards the contract
            logger.warning("omitting empty group (%s, %s)", model, mode)
            continue
        n = len(recs)
        sources: dict[str, int] = {}
        for r in recs:
            sources[r.metrics.token_source] = sources.get(r.metrics.token_source, 0) + 1
        rows.append(AggregateRow(
            model=model, mode=mode, count=n,
            mean_execution_time_s=sum(r.metrics.execution_time_s for r in recs) / n,
            mean_tokens=sum(r.metrics.tokens for r in recs) / n,
            mean_response_bytes=sum(r.metrics.response_bytes for r in recs) / n,
            token_sources=sources,
        ))
    return rows


_TABLE_ROWS = [
    ("Execution Time (s)", lambda r: f"{r.mean_execution_time_s:.4f}"),
    ("Memory Usage (MB)", lambda r: NA),
    ("GPU Utilization (%)", lambda r: NA),
    ("Avg. number of tokens", lambda r: f"{r.mean_tokens:.4f}"),
    ("Avg. Response size (bytes)", lambda r: f"{r.mean_response_bytes:.4f}"),
]


def format_table(rows: list[AggregateRow]) -> str:
    """Aligned text table: one column per (model, mode) group."""
    headers = ["Metric"] + [f"{r.model} ({r.mode.upper()})" for r in rows]
    lines = [[name] + [fmt(r) for r in rows] for name, fmt in _TABLE_ROWS]
    widths = [max(len(str(row[i])) for row in [headers] + lines) for i in range(len(headers))]
    def render(row):
        return "  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)).rstrip()
    return "\n".join([render(headers)] + [render(l) for l in lines])
