/** DOM wiring: the only module that touches the document. */

import { ServiceClient } from "./api.js";
import { renderEntry, submitQuery } from "./chat.js";
import { AlertFeed, renderAlerts } from "./alerts.js";
import { renderReport } from "./report.js";
import type { ChatEntry, EvalReportView, Mode } from "./types.js";

const client = new ServiceClient("");
const entries: ChatEntry[] = [];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function redrawChat(): void {
  el("chat-log").innerHTML = entries.map(renderEntry).join("");
}

function wireChat(): void {
  const form = el<HTMLFormElement>("chat-form");
  const input = el<HTMLInputElement>("question");
  const kInput = el<HTMLInputElement>("top-k");
  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    const question = input.value.trim();
    if (!question) return;
    const mode = (form.querySelector('input[name="mode"]:checked') as HTMLInputElement)
      .value as Mode;
    const k = kInput.value ? Number(kInput.value) : undefined;
    const entry = await submitQuery(client, question, mode, k);
    entries.unshift(entry);
    if (!entry.error) input.value = "";
    redrawChat();
  });
}

function wireAlerts(): void {
  const feed = new AlertFeed(client);
  const panel = el("alerts-panel");
  const tick = async () => {
    const state = await feed.pollOnce();
    panel.innerHTML = renderAlerts(state);
    window.setTimeout(tick, feed.nextDelayMs());
  };
  void tick();
}

function wireReport(): void {
  const form = el<HTMLFormElement>("report-form");
  const input = el<HTMLInputElement>("report-id");
  const panel = el("report-panel");
  form.addEventListener("submit", async (ev) => {
    ev.preventDefault();
    try {
      const report = await client.report<EvalReportView>(input.value.trim());
      panel.innerHTML = renderReport(report);
    } catch {
      panel.innerHTML = renderReport(null);
    }
  });
}

async function wireHealth(): Promise<void> {
  try {
    const health = await client.health();
    el("health").textContent = `service ok · ${String(health.chunks)} chunks`;
  } catch {
    el("health").textContent = "service unreachable";
  }
}

wireChat();
wireAlerts();
wireReport();
void wireHealth();
