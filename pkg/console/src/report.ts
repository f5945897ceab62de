/** Anomaly dashboard rendering: per-class table, confusion grid, AUC list.
 *
 * Every number is passed through String() straight from the report JSON;
 * the console does no arithmetic on metric values. Cells with service-side
 * zero-division flags get annotated.
 */

import type { EvalReportView } from "./types.js";
import { escapeHtml } from "./chat.js";

function flagged(report: EvalReportView, cls: string, metric: string): boolean {
  return (report.flags ?? []).includes(`zero_division:${cls}:${metric}`);
}

export function renderClassTable(report: EvalReportView): string {
  const header =
    "<tr><th>Class</th><th>Precision</th><th>Recall</th><th>F1-Score</th><th>Support</th></tr>";
  const rows = report.classes
    .map((cls) => {
      const m = report.per_class[cls];
      const mark = (metric: string, value: number) =>
        flagged(report, cls, metric)
          ? `${String(value)}<sup title="zero division">*</sup>`
          : String(value);
      return (
        `<tr><td>${escapeHtml(cls)}</td><td>${mark("precision", m.precision)}</td>` +
        `<td>${mark("recall", m.recall)}</td><td>${String(m.f1)}</td>` +
        `<td>${String(m.support)}</td></tr>`
      );
    })
    .join("");
  const macro =
    `<tr class="avg macro"><td>Macro Avg</td><td>${String(report.macro_avg.precision)}</td>` +
    `<td>${String(report.macro_avg.recall)}</td><td>${String(report.macro_avg.f1)}</td><td></td></tr>`;
  const weighted =
    `<tr class="avg weighted"><td>Weighted Avg</td><td>${String(report.weighted_avg.precision)}</td>` +
    `<td>${String(report.weighted_avg.recall)}</td><td>${String(report.weighted_avg.f1)}</td><td></td></tr>`;
  const accuracy =
    `<tr class="accuracy"><td>Accuracy</td><td colspan="4">${String(report.accuracy)}</td></tr>`;
  return `<table class="class-table">${header}${rows}${macro}${weighted}${accuracy}</table>`;
}

export function renderConfusion(report: EvalReportView): string {
  const peak = Math.max(1, ...report.confusion.flat());
  const header =
    `<tr><th></th>${report.classes.map((c) => `<th>${escapeHtml(c)}</th>`).join("")}</tr>`;
  const rows = report.confusion
    .map((row, i) => {
      const cells = row
        .map((count) => {
          const heat = Math.round((count / peak) * 9);
          return `<td class="heat-${heat}">${String(count)}</td>`;
        })
        .join("");
      return `<tr><th>${escapeHtml(report.classes[i])}</th>${cells}</tr>`;
    })
    .join("");
  return `<table class="confusion">${header}${rows}</table>`;
}

export function renderAucList(report: EvalReportView): string {
  const items = report.classes
    .map((cls) => {
      const value = report.roc_auc[cls];
      const shown = value === null || value === undefined ? "undefined" : String(value);
      return `<li><span class="cls">${escapeHtml(cls)}</span> <span class="auc">${shown}</span></li>`;
    })
    .join("");
  return `<ul class="auc-list">${items}</ul>`;
}

export function renderReport(report: EvalReportView | null): string {
  if (report === null) {
    return `<div class="report missing">report not found</div>`;
  }
  return (
    `<section class="report">` +
    `<h3>Classification report</h3>${renderClassTable(report)}` +
    `<h3>Confusion matrix</h3>${renderConfusion(report)}` +
    `<h3>Per-class ROC-AUC</h3>${renderAucList(report)}` +
    `</section>`
  );
}
