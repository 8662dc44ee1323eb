import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { parseRecords, RecordsParseError } from "../src/records.js";

const FIXTURES = join(__dirname, "fixtures");
const golden = readFileSync(join(FIXTURES, "golden_drs.csv"), "utf8");

describe("parseRecords", () => {
  it("reads the golden records file", () => {
    const rec = parseRecords(golden, "golden_drs.csv");
    expect(rec.horizon).toBe(60);
    expect(rec.nodeCount).toBe(6);
    expect(rec.loss).toHaveLength(60);
    expect(rec.loss[0]).toHaveLength(6);
    for (const row of rec.loss) for (const v of row) expect(Number.isFinite(v)).toBe(true);
  });

  it("rejects a wrong header with the line number", () => {
    expect(() => parseRecords("t,node,loss\n1,0,0.5\n", "bad.csv")).toThrowError(/bad\.csv:1: expected column/);
  });

  it("rejects a non-numeric cell with its line number", () => {
    const lines = golden.split("\n");
    lines[3] = lines[3].replace(/^(\d+,\d+,)[^,]+/, "$1oops");
    expect(() => parseRecords(lines.join("\n"), "bad.csv")).toThrowError(RecordsParseError);
    expect(() => parseRecords(lines.join("\n"), "bad.csv")).toThrowError(/bad\.csv:4: column 'loss'/);
  });

  it("rejects files with missing (round, node) rows", () => {
    const lines = golden.split("\n").filter((line) => !line.startsWith("7,3,"));
    expect(() => parseRecords(lines.join("\n"), "gap.csv")).toThrowError(/missing row for round 7, node 3/);
  });

  it("rejects empty input", () => {
    expect(() => parseRecords("", "empty.csv")).toThrowError(/empty\.csv:1/);
  });
});
