/**
 * Data series behind each figure kind. Pure functions of the parsed records,
 * so the rendering layer (and the tests) can inspect exactly what gets drawn.
 */

import type { RecordsTable } from "./records.js";

export interface Series {
  label: string;
  x: number[];
  y: number[];
}

function meanOverNodes(matrix: number[][]): number[] {
  return matrix.map((row) => row.reduce((a, b) => a + b, 0) / row.length);
}

function cumulative(values: number[]): number[] {
  const out = new Array<number>(values.length);
  let total = 0;
  for (let i = 0; i < values.length; i++) {
    total += values[i];
    out[i] = total;
  }
  return out;
}

/** Cumulative network-mean loss per round; divided by the round index when `average`. */
export function cumulativeLossSeries(rec: RecordsTable, label: string, average = false): Series {
  const cum = cumulative(meanOverNodes(rec.loss));
  const y = average ? cum.map((v, i) => v / (i + 1)) : cum;
  return { label, x: cum.map((_, i) => i + 1), y };
}

/** Cumulative network-mean hard violation per round (identically zero for adjusted runs). */
export function cumulativeViolationSeries(rec: RecordsTable, label: string): Series {
  const y = cumulative(meanOverNodes(rec.violation));
  return { label, x: y.map((_, i) => i + 1), y };
}

export interface BarsData {
  window: number;
  nodes: number[];
  /** mean received/demand ratio over the final window, per run */
  ratios: { label: string; values: number[] }[];
  /** keep-own-generation reference ratio over the same window */
  baseline: number[];
}

function windowMean(matrix: number[][], window: number): number[] {
  const horizon = matrix.length;
  const nodes = matrix[0].length;
  const out = new Array<number>(nodes).fill(0);
  for (let t = horizon - window; t < horizon; t++) {
    for (let n = 0; n < nodes; n++) out[n] += matrix[t][n];
  }
  return out.map((v) => v / window);
}

/** Final-window satisfaction ratios per node, plus the no-sharing reference. */
export function satisfactionBars(recs: { table: RecordsTable; label: string }[], window?: number): BarsData {
  const first = recs[0].table;
  const w = window ?? Math.max(1, Math.floor(first.horizon / 10));
  if (w < 1 || w > first.horizon) {
    throw new Error(`window must lie in [1, ${first.horizon}], got ${w}`);
  }
  const ratios = recs.map(({ table, label }) => ({ label, values: windowMean(table.satisfaction, w) }));
  const noSharing = windowMean(
    first.generation.map((row, t) => row.map((g, n) => g / first.demand[t][n])),
    w,
  );
  return {
    window: w,
    nodes: Array.from({ length: first.nodeCount }, (_, n) => n),
    ratios,
    baseline: noSharing,
  };
}
