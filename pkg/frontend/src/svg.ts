/**
 * Minimal deterministic SVG charts: polyline series and grouped bars.
 * No DOM, no canvas; the output is a plain vector figure whose bytes are a
 * pure function of the data.
 */

import type { BarsData, Series } from "./series.js";

const WIDTH = 800;
const HEIGHT = 500;
const MARGIN = { top: 40, right: 30, bottom: 55, left: 75 };

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const BASELINE_FILL = "#bbbbbb";

const fmt = (v: number): string => {
  if (!Number.isFinite(v)) return "0";
  const r = Math.round(v * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
};

const fmtTick = (v: number): string => {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 10000 || a < 0.01) return v.toExponential(1);
  return String(Math.round(v * 100) / 100);
};

function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (hi === lo) hi = lo + 1;
  const step = (hi - lo) / (count - 1);
  return Array.from({ length: count }, (_, i) => lo + i * step);
}

interface Frame {
  sx: (v: number) => number;
  sy: (v: number) => number;
  body: string[];
}

function frame(xLo: number, xHi: number, yLo: number, yHi: number, title: string, xLabel: string, yLabel: string): Frame {
  if (xHi === xLo) xHi = xLo + 1;
  if (yHi === yLo) yHi = yLo + 1;
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (v: number) => MARGIN.left + ((v - xLo) / (xHi - xLo)) * plotW;
  const sy = (v: number) => MARGIN.top + plotH - ((v - yLo) / (yHi - yLo)) * plotH;
  const body: string[] = [];
  body.push(`<rect x="0" y="0" width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  body.push(`<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="17" font-family="sans-serif">${title}</text>`);
  for (const v of niceTicks(yLo, yHi)) {
    const y = fmt(sy(v));
    body.push(`<line x1="${MARGIN.left}" y1="${y}" x2="${WIDTH - MARGIN.right}" y2="${y}" stroke="#e5e5e5" stroke-width="1"/>`);
    body.push(`<text x="${MARGIN.left - 8}" y="${fmt(sy(v) + 4)}" text-anchor="end" font-size="12" font-family="sans-serif">${fmtTick(v)}</text>`);
  }
  for (const v of niceTicks(xLo, xHi)) {
    const x = fmt(sx(v));
    body.push(`<line x1="${x}" y1="${fmt(sy(yLo))}" x2="${x}" y2="${fmt(sy(yLo) + 5)}" stroke="#333" stroke-width="1"/>`);
    body.push(`<text x="${x}" y="${fmt(sy(yLo) + 20)}" text-anchor="middle" font-size="12" font-family="sans-serif">${fmtTick(v)}</text>`);
  }
  body.push(
    `<line x1="${MARGIN.left}" y1="${fmt(sy(yLo))}" x2="${WIDTH - MARGIN.right}" y2="${fmt(sy(yLo))}" stroke="#333" stroke-width="1.5"/>`,
  );
  body.push(`<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${fmt(sy(yLo))}" stroke="#333" stroke-width="1.5"/>`);
  body.push(
    `<text x="${WIDTH / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-size="14" font-family="sans-serif">${xLabel}</text>`,
  );
  body.push(
    `<text x="20" y="${HEIGHT / 2}" text-anchor="middle" font-size="14" font-family="sans-serif" transform="rotate(-90 20 ${HEIGHT / 2})">${yLabel}</text>`,
  );
  return { sx, sy, body };
}

function legend(body: string[], entries: { label: string; color: string }[]): void {
  entries.forEach(({ label, color }, k) => {
    const y = MARGIN.top + 8 + 18 * k;
    body.push(`<rect x="${WIDTH - MARGIN.right - 150}" y="${y - 9}" width="12" height="12" fill="${color}"/>`);
    body.push(
      `<text x="${WIDTH - MARGIN.right - 133}" y="${y + 2}" font-size="12" font-family="sans-serif">${label}</text>`,
    );
  });
}

function document(body: string[]): string {
  return `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${WIDTH} ${HEIGHT}" width="${WIDTH}" height="${HEIGHT}">\n${body.join("\n")}\n</svg>\n`;
}

export function renderLines(seriesList: Series[], title: string, yLabel: string): string {
  const xHi = Math.max(...seriesList.map((s) => s.x[s.x.length - 1]));
  const yAll = seriesList.flatMap((s) => s.y);
  const yLo = Math.min(0, ...yAll);
  const yHi = Math.max(...yAll, yLo + 1e-9);
  const f = frame(1, xHi, yLo, yHi, title, "round", yLabel);
  seriesList.forEach((s, k) => {
    // thin dense series for drawing only: at most ~1600 points per polyline
    const stride = Math.max(1, Math.ceil(s.x.length / 1600));
    const pts: string[] = [];
    for (let i = 0; i < s.x.length; i += stride) pts.push(`${fmt(f.sx(s.x[i]))},${fmt(f.sy(s.y[i]))}`);
    const last = s.x.length - 1;
    if (last % stride !== 0) pts.push(`${fmt(f.sx(s.x[last]))},${fmt(f.sy(s.y[last]))}`);
    f.body.push(
      `<polyline fill="none" stroke="${PALETTE[k % PALETTE.length]}" stroke-width="1.8" points="${pts.join(" ")}"/>`,
    );
  });
  legend(f.body, seriesList.map((s, k) => ({ label: s.label, color: PALETTE[k % PALETTE.length] })));
  return document(f.body);
}

export function renderBars(bars: BarsData, title: string): string {
  const groups = bars.nodes.length;
  const perGroup = bars.ratios.length + 1; // runs plus the no-sharing reference
  const yAll = [...bars.baseline, ...bars.ratios.flatMap((r) => r.values), 1.0];
  const yHi = Math.max(...yAll) * 1.1;
  const f = frame(0, groups, 0, yHi, title, "node", "received / demand");
  const groupWidth = (WIDTH - MARGIN.left - MARGIN.right) / groups;
  const barWidth = (groupWidth * 0.8) / perGroup;
  bars.nodes.forEach((node, g) => {
    const x0 = f.sx(g) + groupWidth * 0.1;
    const all = [{ label: "no sharing", values: bars.baseline, color: BASELINE_FILL }].concat(
      bars.ratios.map((r, k) => ({ label: r.label, values: r.values, color: PALETTE[k % PALETTE.length] })),
    );
    all.forEach((entry, k) => {
      const v = entry.values[node];
      const y = f.sy(Math.max(0, v));
      const h = Math.abs(f.sy(0) - y);
      f.body.push(
        `<rect x="${fmt(x0 + k * barWidth)}" y="${fmt(y)}" width="${fmt(barWidth * 0.92)}" height="${fmt(h)}" fill="${entry.color}"/>`,
      );
    });
    f.body.push(
      `<text x="${fmt(f.sx(g) + groupWidth / 2)}" y="${fmt(f.sy(0) + 20)}" text-anchor="middle" font-size="12" font-family="sans-serif">${node}</text>`,
    );
  });
  // full-satisfaction reference line at ratio 1.0
  f.body.push(
    `<line class="ref-line" x1="${MARGIN.left}" y1="${fmt(f.sy(1))}" x2="${WIDTH - MARGIN.right}" y2="${fmt(f.sy(1))}" stroke="#000" stroke-width="1.2" stroke-dasharray="6,4"/>`,
  );
  legend(
    f.body,
    [{ label: "no sharing", color: BASELINE_FILL }].concat(
      bars.ratios.map((r, k) => ({ label: r.label, color: PALETTE[k % PALETTE.length] })),
    ),
  );
  return document(f.body);
}
