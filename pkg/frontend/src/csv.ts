/** CSV tables as written by the solver CLI: header row, comma separated,
 * full-precision decimal floats. Parsing keeps exact binary values. */

import { readFileSync } from "node:fs";

export interface Table {
  path: string;
  columns: string[];
  /** column name -> values; non-numeric columns are kept as strings */
  data: Record<string, number[] | string[]>;
  rows: number;
}

export class CsvError extends Error {}

export function readCsv(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new CsvError(`cannot read CSV ${path}: ${(err as Error).message}`);
  }
  const lines = text.split("\n").filter((ln) => ln.trim().length > 0);
  if (lines.length === 0) throw new CsvError(`${path}: empty CSV`);
  const columns = lines[0].split(",");
  const raw: string[][] = columns.map(() => []);
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== columns.length) {
      throw new CsvError(
        `${path}:${i + 1}: expected ${columns.length} fields, got ${parts.length}`,
      );
    }
    parts.forEach((v, j) => raw[j].push(v));
  }
  const data: Record<string, number[] | string[]> = {};
  columns.forEach((name, j) => {
    const nums = raw[j].map(Number);
    data[name] = nums.every(Number.isFinite) ? nums : raw[j];
  });
  return { path, columns, data, rows: lines.length - 1 };
}

export function numericColumn(table: Table, name: string): number[] {
  const col = table.data[name];
  if (col === undefined) {
    throw new CsvError(
      `${table.path}: no column '${name}' (have ${table.columns.join(", ")})`,
    );
  }
  if (col.length > 0 && typeof col[0] !== "number") {
    throw new CsvError(`${table.path}: column '${name}' is not numeric`);
  }
  return col as number[];
}
