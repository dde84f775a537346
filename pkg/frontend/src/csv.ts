/**
 * CSV loading and schema validation for the similab artifacts.
 *
 * Files are plain comma-separated text with a mandatory header row.
 * Schema violations throw SchemaError carrying the offending column
 * name, which the CLI surfaces with a nonzero exit code.
 */

import * as fs from "fs";

export class SchemaError extends Error {
  column: string;
  constructor(message: string, column: string) {
    super(message);
    this.column = column;
  }
}

export class EmptyCsvError extends Error {}

export interface Table {
  columns: string[];
  rows: Record<string, string>[];
}

export function parseCsv(path: string): Table {
  const text = fs.readFileSync(path, "utf8");
  const lines = text.split(/\r?\n/).filter((line) => line.trim() !== "");
  if (lines.length === 0) {
    throw new EmptyCsvError(`${path}: no header row`);
  }
  const columns = lines[0].split(",").map((c) => c.trim());
  const rows = lines.slice(1).map((line) => {
    const cells = line.split(",");
    const row: Record<string, string> = {};
    columns.forEach((col, i) => {
      row[col] = (cells[i] ?? "").trim();
    });
    return row;
  });
  return { columns, rows };
}

/** Validate presence of columns and numeric content; return number rows. */
export function requireNumeric(
  table: Table,
  required: string[],
  path: string
): Record<string, number>[] {
  for (const col of required) {
    if (!table.columns.includes(col)) {
      throw new SchemaError(`${path}: missing column '${col}'`, col);
    }
  }
  if (table.rows.length === 0) {
    throw new EmptyCsvError(`${path}: no rows`);
  }
  return table.rows.map((row, i) => {
    const out: Record<string, number> = {};
    for (const col of required) {
      const value = Number(row[col]);
      if (!Number.isFinite(value)) {
        throw new SchemaError(
          `${path}: row ${i + 1}, column '${col}' is not a finite number ` +
            `(got '${row[col]}')`,
          col
        );
      }
      out[col] = value;
    }
    return out;
  });
}

/** key/value tables (report.csv, norms.csv). */
export function keyValueMap(table: Table, path: string): Map<string, string> {
  for (const col of ["key", "value"]) {
    if (!table.columns.includes(col)) {
      throw new SchemaError(`${path}: missing column '${col}'`, col);
    }
  }
  const map = new Map<string, string>();
  for (const row of table.rows) {
    map.set(row["key"], row["value"]);
  }
  return map;
}
