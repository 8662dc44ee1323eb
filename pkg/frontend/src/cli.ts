#!/usr/bin/env node
/**
 * plot --kind cumloss|violation|bars --in run1.csv[,run2.csv...] --out fig.svg
 *      [--average] [--labels a,b] [--window N]
 */

import { renderPlot, type PlotKind, type PlotSpec } from "./plot.js";

const USAGE =
  "usage: dershare-plot plot --kind cumloss|violation|bars --in run1.csv[,run2.csv...] " +
  "--out fig.svg [--average] [--labels a,b] [--window N]";

export function parseArgs(argv: string[]): PlotSpec {
  if (argv[0] !== "plot") throw new Error(USAGE);
  const spec: Partial<PlotSpec> = {};
  for (let i = 1; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      const v = argv[++i];
      if (v === undefined) throw new Error(`missing value for ${arg}\n${USAGE}`);
      return v;
    };
    switch (arg) {
      case "--kind": {
        const kind = next();
        if (kind !== "cumloss" && kind !== "violation" && kind !== "bars") {
          throw new Error(`unknown --kind '${kind}'\n${USAGE}`);
        }
        spec.kind = kind as PlotKind;
        break;
      }
      case "--in":
        spec.inputs = next().split(",").filter((s) => s.length > 0);
        break;
      case "--out":
        spec.output = next();
        break;
      case "--average":
        spec.average = true;
        break;
      case "--labels":
        spec.labels = next().split(",");
        break;
      case "--window":
        spec.window = Number(next());
        break;
      default:
        throw new Error(`unknown argument '${arg}'\n${USAGE}`);
    }
  }
  if (!spec.kind || !spec.inputs || !spec.output) throw new Error(USAGE);
  return spec as PlotSpec;
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    renderPlot(spec);
    console.log(`wrote ${spec.output}`);
    return 0;
  } catch (err) {
    console.error(err instanceof Error ? err.message : String(err));
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
