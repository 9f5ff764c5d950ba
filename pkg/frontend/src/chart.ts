/** Case-count timeline: scale math and SVG building for dated events. */

import type { EventItem } from "./api.js";
import { escapeHtml } from "./render.js";

export interface TimelinePoint {
  date: string; // ISO day
  cases: number;
  id: string;
}

export interface PlacedPoint extends TimelinePoint {
  x: number;
  y: number;
}

export interface ChartModel {
  points: PlacedPoint[];
  path: string; // empty for a single point: marker only, no line
  width: number;
  height: number;
}

export function timelinePoints(items: EventItem[]): TimelinePoint[] {
  return items
    .filter((item) => item.date !== null && item.cases !== null)
    .map((item) => ({ date: item.date as string, cases: item.cases as number, id: item.id }))
    .sort((a, b) => (a.date < b.date ? -1 : a.date > b.date ? 1 : a.id < b.id ? -1 : 1));
}

const PAD = 40;

export function buildChart(points: TimelinePoint[], width = 800, height = 300): ChartModel {
  if (points.length === 0) return { points: [], path: "", width, height };
  const times = points.map((p) => Date.parse(p.date));
  const values = points.map((p) => p.cases);
  const tMin = Math.min(...times);
  const tMax = Math.max(...times);
  const vMax = Math.max(...values, 1);
  const spanT = tMax - tMin || 1;
  const placed = points.map((p, i) => ({
    ...p,
    x: PAD + ((Date.parse(p.date) - tMin) / spanT) * (width - 2 * PAD),
    y: height - PAD - (values[i] / vMax) * (height - 2 * PAD),
  }));
  const path = placed.length < 2
    ? ""
    : "M " + placed.map((p) => `${p.x.toFixed(1)} ${p.y.toFixed(1)}`).join(" L ");
  return { points: placed, path, width, height };
}

export function renderChartSvg(model: ChartModel): string {
  if (model.points.length === 0) {
    return `<p class="placeholder">no dated case counts</p>`;
  }
  const markers = model.points.map((p) =>
    `<circle class="point" r="4" cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" ` +
    `data-id="${escapeHtml(p.id)}">` +
    `<title>${escapeHtml(`${p.date}: ${p.cases} cases (${p.id})`)}</title></circle>`,
  ).join("");
  const line = model.path
    ? `<path class="line" d="${model.path}" fill="none"/>` : "";
  return `<svg viewBox="0 0 ${model.width} ${model.height}" class="timeline" ` +
    `role="img">${line}${markers}</svg>`;
}
