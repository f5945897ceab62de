/** Thin typed client over the service API. All rendering stays elsewhere;
 * this module only moves JSON. */

import type { AlertsResponse, Mode, QueryBody, RagRecordView } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** The request body for a query; the mode toggle changes this field only. */
export function buildQueryBody(question: string, mode: Mode, k?: number): QueryBody {
  const body: QueryBody = { question, mode };
  if (k !== undefined) {
    body.k = k;
  }
  return body;
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!resp.ok) {
      const detail = await resp.text();
      throw new Error(`${path} failed: ${resp.status} ${detail}`);
    }
    return (await resp.json()) as T;
  }

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!resp.ok) {
      throw new Error(`${path} failed: ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  query(question: string, mode: Mode, k?: number): Promise<RagRecordView> {
    return this.post<RagRecordView>("/v1/query", buildQueryBody(question, mode, k));
  }

  alerts(cursor: number): Promise<AlertsResponse> {
    return this.get<AlertsResponse>(`/v1/alerts?since=${cursor}`);
  }

  report<T>(id: string): Promise<T> {
    return this.get<T>(`/v1/reports/${encodeURIComponent(id)}`);
  }

  health(): Promise<{ status: string; chunks: number }> {
    return this.get("/v1/health");
  }
}
