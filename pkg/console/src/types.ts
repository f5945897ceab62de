/** Payload shapes of the admin service HTTP API (the console's only data source). */

export type Mode = "nc" | "wc";

export interface QueryBody {
  question: string;
  mode: Mode;
  k?: number;
}

export interface Hit {
  chunk_id: string;
  score: number;
}

export interface ResourceMetricsView {
  execution_time_s: number;
  tokens: number;
  response_bytes: number;
  token_source: string;
}

export interface RagRecordView {
  request: { question: string; mode: Mode; k: number; use_case: string | null };
  retrieved: Hit[];
  prompt: string;
  answer: string;
  metrics: ResourceMetricsView;
  model: string;
  error: string | null;
}

export interface SourceRef {
  chunk_id: string;
  source: string;
  page: string;
  score: number;
}

export interface ChatEntry {
  question: string;
  mode: Mode;
  answer: string;
  sources: SourceRef[];
  metrics: ResourceMetricsView | null;
  error: string | null;
}

export interface Alert {
  id: string;
  timestamp: number;
  predicted_class: string;
  confidence: number;
  row_text: string;
}

export interface AlertsResponse {
  alerts: Alert[];
  cursor: number;
}

export interface ClassMetricsView {
  precision: number;
  recall: number;
  f1: number;
  support: number;
}

export interface EvalReportView {
  classes: string[];
  per_class: Record<string, ClassMetricsView>;
  accuracy: number;
  macro_avg: { precision: number; recall: number; f1: number };
  weighted_avg: { precision: number; recall: number; f1: number };
  confusion: number[][];
  roc_auc: Record<string, number | null>;
  flags?: string[];
}
