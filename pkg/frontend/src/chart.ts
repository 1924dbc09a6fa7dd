// Minimal SVG renderer for the dimension tradeoff: three series (k, t,
// NUE %) over d, the chosen candidate starred, infeasible ones greyed.
// Three series and a star are the whole requirement; no chart library.

import type { DimensionReport } from "./types.js";

const WIDTH = 560;
const HEIGHT = 260;
const MARGIN = { top: 16, right: 56, bottom: 34, left: 56 };

interface Series {
  name: string;
  css: string;
  values: number[];
  max: number;
}

function scaleX(i: number, count: number): number {
  const inner = WIDTH - MARGIN.left - MARGIN.right;
  if (count === 1) return MARGIN.left + inner / 2;
  return MARGIN.left + (i * inner) / (count - 1);
}

function scaleY(value: number, max: number): number {
  const inner = HEIGHT - MARGIN.top - MARGIN.bottom;
  const safe = max <= 0 ? 1 : max;
  return MARGIN.top + inner * (1 - value / safe);
}

function polyline(series: Series, count: number): string {
  const points = series.values
    .map((v, i) => `${scaleX(i, count).toFixed(1)},` +
                   `${scaleY(v, series.max).toFixed(1)}`)
    .join(" ");
  return `<polyline class="series ${series.css}" fill="none" ` +
         `points="${points}"/>`;
}

function star(cx: number, cy: number, r: number): string {
  const points: string[] = [];
  for (let i = 0; i < 10; i++) {
    const radius = i % 2 === 0 ? r : r / 2.4;
    const angle = -Math.PI / 2 + (i * Math.PI) / 5;
    points.push(
      `${(cx + radius * Math.cos(angle)).toFixed(1)},` +
        `${(cy + radius * Math.sin(angle)).toFixed(1)}`,
    );
  }
  return `<polygon class="star" points="${points.join(" ")}"/>`;
}

export function renderTradeoffChart(report: DimensionReport): string {
  const candidates = report.candidates;
  const count = candidates.length;
  const kMax = Math.max(...candidates.map((c) => c.k), 1);
  const series: Series[] = [
    { name: "k", css: "series-k", values: candidates.map((c) => c.k),
      max: kMax },
    { name: "t", css: "series-t", values: candidates.map((c) => c.t),
      max: 1 },
    { name: "NUE %", css: "series-nue",
      values: candidates.map((c) => c.nue_percent), max: 100 },
  ];

  const parts: string[] = [];
  parts.push(
    `<svg class="tradeoff" viewBox="0 0 ${WIDTH} ${HEIGHT}" ` +
      `role="img" aria-label="privacy/utility tradeoff across ` +
      `QID dimensions">`,
  );
  const axisY = HEIGHT - MARGIN.bottom;
  parts.push(
    `<line class="axis" x1="${MARGIN.left}" y1="${axisY}" ` +
      `x2="${WIDTH - MARGIN.right}" y2="${axisY}"/>`,
  );
  for (const s of series) {
    parts.push(polyline(s, count));
  }
  candidates.forEach((c, i) => {
    const x = scaleX(i, count);
    for (const s of series) {
      const y = scaleY(s.values[i], s.max);
      const cls = c.feasible ? "point" : "point infeasible";
      parts.push(
        `<circle class="${cls} ${s.css}" cx="${x.toFixed(1)}" ` +
          `cy="${y.toFixed(1)}" r="3" data-d="${c.d}"/>`,
      );
    }
    if (c.d === report.chosen_d) {
      const y = scaleY(c.nue_percent, 100);
      parts.push(star(x, y, 9));
    }
    parts.push(
      `<text class="tick" x="${x.toFixed(1)}" y="${HEIGHT - 12}" ` +
        `text-anchor="middle">${c.d}</text>`,
    );
  });
  parts.push(
    `<text class="axis-label" x="${WIDTH / 2}" y="${HEIGHT - 1}" ` +
      `text-anchor="middle">QID dimension d</text>`,
  );
  const legendY = MARGIN.top;
  series.forEach((s, i) => {
    const x = WIDTH - MARGIN.right + 6;
    parts.push(
      `<text class="legend ${s.css}" x="${x}" y="${legendY + i * 16}">` +
        `${s.name}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}
