/** Detection table rendering.
 *
 * Pure: rows in, markup out. Column order is the operator-facing
 * contract (sensor, lat, lon, alt, speed, type, confidence) and every
 * cell is a formatted response field — nothing is computed client-side.
 */

import { deg, joinSensors, metres, mps, pct } from "./format.js";
import type { DetectionRow, WindowSummary } from "./types.js";

export const COLUMNS = [
  "sensor",
  "latitude",
  "longitude",
  "altitude",
  "speed",
  "type",
  "confidence",
] as const;

export const EMPTY_PLACEHOLDER = "no detections in window";

export interface TableModel {
  columns: readonly string[];
  cells: string[][];
}

export function tableModel(rows: DetectionRow[]): TableModel {
  const ordered = [...rows].sort((a, b) => a.timestamp - b.timestamp);
  return {
    columns: COLUMNS,
    cells: ordered.map((row) => [
      joinSensors(row.sensors),
      deg(row.latitude),
      deg(row.longitude),
      metres(row.altitude),
      mps(row.speed),
      row.drone_type,
      pct(row.confidence),
    ]),
  };
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function tableHtml(rows: DetectionRow[]): string {
  if (rows.length === 0) {
    return `<p class="placeholder">${EMPTY_PLACEHOLDER}</p>`;
  }
  const model = tableModel(rows);
  const head = model.columns.map((c) => `<th>${escapeHtml(c)}</th>`).join("");
  const body = model.cells
    .map((cells) => `<tr>${cells.map((c) => `<td>${escapeHtml(c)}</td>`).join("")}</tr>`)
    .join("\n");
  return `<table class="detections"><thead><tr>${head}</tr></thead>\n<tbody>\n${body}\n</tbody></table>`;
}

/** Confidence panel: modal class and mean confidence over the window. */
export function summaryHtml(summary: WindowSummary | null, cvAccuracy: number | null): string {
  if (summary === null) {
    return `<p class="placeholder">no summary for this window</p>`;
  }
  const cv =
    cvAccuracy === null
      ? ""
      : `<dt>model CV accuracy</dt><dd>${escapeHtml(pct(cvAccuracy))}</dd>`;
  return (
    `<dl class="summary">` +
    `<dt>modal type</dt><dd>${escapeHtml(summary.modal_type)}</dd>` +
    `<dt>mean confidence</dt><dd>${escapeHtml(pct(summary.mean_confidence))}</dd>` +
    `<dt>rows</dt><dd>${summary.rows}</dd>` +
    cv +
    `</dl>`
  );
}
