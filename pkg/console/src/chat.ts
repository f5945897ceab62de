/** Chat panel logic: turn query responses into entries and render them.
 *
 * Numbers shown in badges come straight from response fields via String();
 * the console never rounds, scales, or recomputes a metric value.
 */

import type { ServiceClient } from "./api.js";
import type { ChatEntry, Mode, RagRecordView, SourceRef } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** chunk ids are "source:page:seq"; split for display only */
export function sourceRef(chunkId: string, score: number): SourceRef {
  const parts = chunkId.split(":");
  const seqPart = parts.length >= 3 ? 2 : 1;
  return {
    chunk_id: chunkId,
    source: parts.slice(0, parts.length - seqPart).join(":") || chunkId,
    page: parts.length >= 3 ? parts[parts.length - 2] : "1",
    score,
  };
}

export function entryFromRecord(record: RagRecordView): ChatEntry {
  return {
    question: record.request.question,
    mode: record.request.mode,
    answer: record.answer,
    sources: record.retrieved.map((h) => sourceRef(h.chunk_id, h.score)),
    metrics: record.metrics,
    error: record.error,
  };
}

export function errorEntry(question: string, mode: Mode, message: string): ChatEntry {
  return { question, mode, answer: "", sources: [], metrics: null, error: message };
}

export async function submitQuery(
  client: ServiceClient,
  question: string,
  mode: Mode,
  k?: number,
): Promise<ChatEntry> {
  try {
    return entryFromRecord(await client.query(question, mode, k));
  } catch (err) {
    // the input stays in the entry so the operator can retry it
    return errorEntry(question, mode, err instanceof Error ? err.message : String(err));
  }
}

export function renderSources(sources: SourceRef[]): string {
  if (sources.length === 0) {
    return `<div class="sources empty">no sources</div>`;
  }
  const items = sources
    .map(
      (s) =>
        `<li><span class="ref">${escapeHtml(s.source)}:${escapeHtml(s.page)}</span> ` +
        `<span class="chunk-id">${escapeHtml(s.chunk_id)}</span> ` +
        `<span class="score">${String(s.score)}</span></li>`,
    )
    .join("");
  return `<ol class="sources">${items}</ol>`;
}

export function renderEntry(entry: ChatEntry): string {
  const badge = entry.metrics
    ? `<span class="badges">${String(entry.metrics.execution_time_s)}s · ` +
      `${String(entry.metrics.tokens)} tokens · ` +
      `${String(entry.metrics.response_bytes)} bytes</span>`
    : "";
  const body = entry.error
    ? `<div class="error">error: ${escapeHtml(entry.error)}</div>`
    : `<div class="answer">${escapeHtml(entry.answer)}</div>${renderSources(entry.sources)}`;
  return (
    `<article class="entry mode-${entry.mode}">` +
    `<div class="question">[${entry.mode.toUpperCase()}] ${escapeHtml(entry.question)}</div>` +
    `${body}${badge}</article>`
  );
}
