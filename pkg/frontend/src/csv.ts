/**
 * CSV ingestion for the solver's output formats.
 *
 * Three schemas are recognized by their headers:
 *   - snapshot:   x,h,um[,alpha1..]  or  x,y,h,um,vm,alpha1,beta1,..
 *   - vof:        x,z,fraction,u  or  x,y,z,fraction,u,v
 *   - slice:      x,model,reference   (comparison report output)
 *
 * Lines starting with '#' are comments; a '# time: <seconds>' comment
 * tags the snapshot instant.  All values are SI.
 */

import { readFileSync } from "fs";

export type TableKind = "snapshot" | "vof" | "slice";

export interface Table {
  file: string;
  kind: TableKind;
  columns: string[];
  rows: number[][];
  time: number | null;
}

export class CsvError extends Error {}

export function missingColumn(file: string, column: string): CsvError {
  return new CsvError(`${file}: missing column '${column}'`);
}

function classify(columns: string[]): TableKind {
  const has = (c: string) => columns.includes(c);
  if (has("fraction") && has("z")) return "vof";
  if (has("model") && has("reference")) return "slice";
  // a snapshot may be missing expected columns; keep it classifiable so
  // the column lookup can name exactly what is absent
  if (has("x") && (has("h") || has("um"))) return "snapshot";
  throw new CsvError(`unrecognized header: ${columns.join(",")}`);
}

export function parseTable(file: string, text: string): Table {
  let columns: string[] | null = null;
  let time: number | null = null;
  const rows: number[][] = [];
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    if (line.startsWith("#")) {
      const m = line.slice(1).trim().match(/^time:\s*(.+)$/i);
      if (m) time = Number(m[1]);
      continue;
    }
    if (!columns) {
      columns = line.split(",").map((c) => c.trim().toLowerCase());
      continue;
    }
    const parts = line.split(",");
    if (parts.length !== columns.length) {
      throw new CsvError(
        `${file}:${i + 1}: expected ${columns.length} values, got ${parts.length}`
      );
    }
    const row = parts.map(Number);
    if (row.some((v) => Number.isNaN(v))) {
      throw new CsvError(`${file}:${i + 1}: non-numeric value in '${line}'`);
    }
    rows.push(row);
  }
  if (!columns) throw new CsvError(`${file}: empty file`);
  if (rows.length === 0) throw new CsvError(`${file}: no data rows`);
  return { file, kind: classify(columns), columns, rows, time };
}

export function loadTable(file: string): Table {
  return parseTable(file, readFileSync(file, "utf8"));
}

/** Values of a named column; throws the documented error when absent. */
export function column(table: Table, name: string): number[] {
  const idx = table.columns.indexOf(name);
  if (idx < 0) throw missingColumn(table.file, name);
  return table.rows.map((r) => r[idx]);
}

export function hasColumn(table: Table, name: string): boolean {
  return table.columns.includes(name);
}
