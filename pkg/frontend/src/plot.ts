/**
 * Figure pipeline: records CSV files in, one SVG figure out.
 *
 * Rendering is a pure function of the input files; the computed data series
 * are returned alongside the SVG so they can be checked against the CSVs
 * directly.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { basename } from "node:path";

import { parseRecords, type RecordsTable } from "./records.js";
import {
  cumulativeLossSeries,
  cumulativeViolationSeries,
  satisfactionBars,
  type BarsData,
  type Series,
} from "./series.js";
import { renderBars, renderLines } from "./svg.js";

export type PlotKind = "cumloss" | "violation" | "bars";

export interface PlotSpec {
  kind: PlotKind;
  inputs: string[];
  output: string;
  /** cumloss only: divide the cumulative loss by the round index */
  average?: boolean;
  labels?: string[];
  /** bars only: final-window length (default: last 10% of rounds) */
  window?: number;
}

export interface PlotResult {
  svg: string;
  lines?: Series[];
  bars?: BarsData;
}

function loadRuns(spec: PlotSpec): { table: RecordsTable; label: string }[] {
  if (spec.inputs.length === 0) throw new Error("need at least one records CSV");
  if (spec.labels && spec.labels.length !== spec.inputs.length) {
    throw new Error(`got ${spec.labels.length} labels for ${spec.inputs.length} inputs`);
  }
  const runs = spec.inputs.map((path, k) => ({
    table: parseRecords(readFileSync(path, "utf8"), path),
    label: spec.labels?.[k] ?? basename(path).replace(/\.csv$/, ""),
  }));
  const first = runs[0].table;
  for (const { table } of runs.slice(1)) {
    if (table.horizon !== first.horizon || table.nodeCount !== first.nodeCount) {
      throw new Error(
        `overlayed runs must share horizon and node count: ${first.path} is ` +
          `${first.horizon}x${first.nodeCount}, ${table.path} is ${table.horizon}x${table.nodeCount}`,
      );
    }
  }
  return runs;
}

/** Compute the figure for `spec` without touching the filesystem output. */
export function buildPlot(spec: PlotSpec): PlotResult {
  const runs = loadRuns(spec);
  if (spec.kind === "cumloss") {
    const lines = runs.map(({ table, label }) => cumulativeLossSeries(table, label, spec.average ?? false));
    const title = spec.average ? "Average cumulative loss" : "Cumulative loss";
    return { svg: renderLines(lines, title, spec.average ? "cumulative loss / round" : "cumulative loss"), lines };
  }
  if (spec.kind === "violation") {
    const lines = runs.map(({ table, label }) => cumulativeViolationSeries(table, label));
    return { svg: renderLines(lines, "Cumulative constraint violation", "cumulative violation"), lines };
  }
  if (spec.kind === "bars") {
    const bars = satisfactionBars(runs, spec.window);
    return { svg: renderBars(bars, `Resource distribution (final ${bars.window} rounds)`), bars };
  }
  throw new Error(`unknown figure kind '${spec.kind}', expected cumloss | violation | bars`);
}

/** Build and write the figure; returns what was drawn. */
export function renderPlot(spec: PlotSpec): PlotResult {
  if (!spec.output.endsWith(".svg")) {
    throw new Error(
      `output must be an .svg path (vector output only, no rasterizer available), got '${spec.output}'`,
    );
  }
  const result = buildPlot(spec);
  writeFileSync(spec.output, result.svg);
  return result;
}
