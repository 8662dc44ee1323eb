/**
 * Reader for the simulator's records CSV.
 *
 * Schema (fixed column order, one row per round and node):
 *   t,node,loss,constraint,violation,satisfaction,dual,generation,demand,alloc_0..alloc_{deg}
 *
 * `satisfaction` is the unclipped received/demand ratio, so values above 1
 * mean surplus. Allocation columns are ragged (trailing cells may be empty)
 * and are not needed for any figure, so they are ignored here.
 */

export const BASE_COLUMNS = [
  "t",
  "node",
  "loss",
  "constraint",
  "violation",
  "satisfaction",
  "dual",
  "generation",
  "demand",
] as const;

export interface RecordsTable {
  path: string;
  horizon: number;
  nodeCount: number;
  /** matrices indexed [t-1][node] */
  loss: number[][];
  constraint: number[][];
  violation: number[][];
  satisfaction: number[][];
  dual: number[][];
  generation: number[][];
  demand: number[][];
}

export class RecordsParseError extends Error {
  constructor(path: string, line: number, message: string) {
    super(`${path}:${line}: ${message}`);
    this.name = "RecordsParseError";
  }
}

function numeric(cell: string, path: string, line: number, column: string): number {
  const value = Number(cell);
  if (cell.trim() === "" || !Number.isFinite(value)) {
    throw new RecordsParseError(path, line, `column '${column}' is not a finite number (got ${JSON.stringify(cell)})`);
  }
  return value;
}

export function parseRecords(text: string, path = "<records>"): RecordsTable {
  const lines = text.split(/\r?\n/);
  if (lines.length === 0 || lines[0].trim() === "") {
    throw new RecordsParseError(path, 1, "empty records file");
  }
  const header = lines[0].split(",");
  for (let k = 0; k < BASE_COLUMNS.length; k++) {
    if (header[k] !== BASE_COLUMNS[k]) {
      throw new RecordsParseError(
        path,
        1,
        `expected column ${k + 1} to be '${BASE_COLUMNS[k]}', got '${header[k] ?? ""}' ` +
          `(header must start with ${BASE_COLUMNS.join(",")})`,
      );
    }
  }

  interface Row {
    t: number;
    node: number;
    values: number[];
    line: number;
  }
  const rows: Row[] = [];
  let horizon = 0;
  let nodeCount = 0;
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i];
    if (line.trim() === "") continue;
    const cells = line.split(",");
    if (cells.length < BASE_COLUMNS.length) {
      throw new RecordsParseError(path, i + 1, `expected at least ${BASE_COLUMNS.length} columns, got ${cells.length}`);
    }
    const t = numeric(cells[0], path, i + 1, "t");
    const node = numeric(cells[1], path, i + 1, "node");
    if (!Number.isInteger(t) || t < 1) throw new RecordsParseError(path, i + 1, `round index t must be a positive integer, got ${cells[0]}`);
    if (!Number.isInteger(node) || node < 0) throw new RecordsParseError(path, i + 1, `node index must be a nonnegative integer, got ${cells[1]}`);
    const values = BASE_COLUMNS.slice(2).map((col, k) => numeric(cells[k + 2], path, i + 1, col));
    rows.push({ t, node, values, line: i + 1 });
    horizon = Math.max(horizon, t);
    nodeCount = Math.max(nodeCount, node + 1);
  }
  if (rows.length === 0) throw new RecordsParseError(path, 2, "no data rows");

  const matrix = () => Array.from({ length: horizon }, () => new Array<number>(nodeCount).fill(NaN));
  const table: RecordsTable = {
    path,
    horizon,
    nodeCount,
    loss: matrix(),
    constraint: matrix(),
    violation: matrix(),
    satisfaction: matrix(),
    dual: matrix(),
    generation: matrix(),
    demand: matrix(),
  };
  const fields: (keyof RecordsTable)[] = ["loss", "constraint", "violation", "satisfaction", "dual", "generation", "demand"];
  for (const row of rows) {
    fields.forEach((field, k) => {
      (table[field] as number[][])[row.t - 1][row.node] = row.values[k];
    });
  }
  for (let t = 0; t < horizon; t++) {
    for (let n = 0; n < nodeCount; n++) {
      if (Number.isNaN(table.loss[t][n])) {
        throw new RecordsParseError(path, 1, `missing row for round ${t + 1}, node ${n}`);
      }
    }
  }
  return table;
}
