/** Readers for the two CSV formats produced by the benchmark harness. */

import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface TraceFile {
  path: string;
  /** `# key=value` comment header lines. */
  meta: Record<string, string>;
  columns: string[];
  /** One row per iteration record; missing cells are NaN. */
  rows: Record<string, number>[];
}

export interface SweepFile {
  path: string;
  /** method name -> points sorted by theta. */
  series: Map<string, { theta: number; rate: number }[]>;
}

function readText(path: string): string {
  try {
    return readFileSync(path, "utf8");
  } catch (err) {
    throw new Error(`cannot read ${path}: ${(err as Error).message}`);
  }
}

/** Parse a solver trace CSV: `# key=value` header comments, then records. */
export function parseTrace(path: string): TraceFile {
  const text = readText(path);
  const meta: Record<string, string> = {};
  const bodyLines: string[] = [];
  for (const line of text.split(/\r?\n/)) {
    if (line.startsWith("#")) {
      const eq = line.indexOf("=");
      if (eq > 1) meta[line.slice(1, eq).trim()] = line.slice(eq + 1).trim();
    } else if (line.trim() !== "") {
      bodyLines.push(line);
    }
  }
  if (bodyLines.length === 0) throw new Error(`no header row in ${path}`);
  const parsed = Papa.parse<string[]>(bodyLines.join("\n"), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new Error(`malformed CSV in ${path}: ${parsed.errors[0].message}`);
  }
  const [columns, ...records] = parsed.data;
  const rows = records.map((cells) => {
    const row: Record<string, number> = {};
    columns.forEach((col, i) => {
      const cell = cells[i];
      row[col] = cell === undefined || cell === "" ? NaN : Number(cell);
    });
    return row;
  });
  return { path, meta, columns, rows };
}

/** Parse a sweep CSV (`theta,method,success_rate`) into per-method series. */
export function parseSweep(path: string): SweepFile {
  const parsed = Papa.parse<Record<string, string>>(readText(path), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new Error(`malformed CSV in ${path}: ${parsed.errors[0].message}`);
  }
  const required = ["theta", "method", "success_rate"];
  const fields = parsed.meta.fields ?? [];
  for (const col of required) {
    if (!fields.includes(col)) throw new Error(`column '${col}' missing in ${path}`);
  }
  if (parsed.data.length === 0) throw new Error(`empty sweep table in ${path}`);
  const series = new Map<string, { theta: number; rate: number }[]>();
  for (const rec of parsed.data) {
    const theta = Number(rec.theta);
    const rate = Number(rec.success_rate);
    if (!Number.isFinite(theta) || !Number.isFinite(rate)) {
      throw new Error(`non-numeric sweep entry in ${path}`);
    }
    const pts = series.get(rec.method) ?? [];
    pts.push({ theta, rate });
    series.set(rec.method, pts);
  }
  for (const pts of series.values()) pts.sort((a, b) => a.theta - b.theta);
  return { path, series };
}
