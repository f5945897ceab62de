/** Pull-based alert feed: poll with a cursor, dedupe by id, back off on
 * failures and surface them only after three in a row. */

import type { ServiceClient } from "./api.js";
import type { Alert } from "./types.js";
import { escapeHtml } from "./chat.js";

export interface AlertFeedState {
  alerts: Alert[];
  cursor: number;
  consecutiveFailures: number;
  visibleError: string | null;
}

export class AlertFeed {
  state: AlertFeedState = {
    alerts: [],
    cursor: 0,
    consecutiveFailures: 0,
    visibleError: null,
  };

  constructor(private readonly client: ServiceClient) {}

  /** One poll round; the interval wiring lives with the DOM. */
  async pollOnce(): Promise<AlertFeedState> {
    try {
      const resp = await this.client.alerts(this.state.cursor);
      const known = new Set(this.state.alerts.map((a) => a.id));
      const fresh = resp.alerts.filter((a) => !known.has(a.id));
      // newest first; the cursor only ever moves forward
      this.state.alerts = [...fresh.reverse(), ...this.state.alerts];
      this.state.cursor = Math.max(this.state.cursor, resp.cursor);
      this.state.consecutiveFailures = 0;
      this.state.visibleError = null;
    } catch (err) {
      this.state.consecutiveFailures += 1;
      if (this.state.consecutiveFailures >= 3) {
        this.state.visibleError = err instanceof Error ? err.message : String(err);
      }
    }
    return this.state;
  }

  /** Grows with the failure streak so transient blips stay quiet. */
  nextDelayMs(baseMs = 3000): number {
    const backoff = Math.min(this.state.consecutiveFailures, 4);
    return baseMs * 2 ** backoff;
  }
}

export function renderAlerts(state: AlertFeedState): string {
  const banner = state.visibleError
    ? `<div class="banner error">alert polling failing: ${escapeHtml(state.visibleError)}</div>`
    : "";
  if (state.alerts.length === 0) {
    return `${banner}<div class="alerts empty">no alerts</div>`;
  }
  const items = state.alerts
    .map(
      (a) =>
        `<li class="alert"><span class="cls">${escapeHtml(a.predicted_class)}</span> ` +
        `<span class="confidence">${String(a.confidence)}</span> ` +
        `<span class="row-text">${escapeHtml(a.row_text)}</span></li>`,
    )
    .join("");
  return `${banner}<ul class="alerts">${items}</ul>`;
}
