/** CSV parsing and per-kind schema validation.
 *
 * Jobs fail loudly when a header does not match the kind's expected schema,
 * naming the missing column.
 */

import { readFileSync } from "node:fs";

export type FigureKind = "heatmap" | "decay" | "regression" | "timeseries";

export interface Table {
  header: string[];
  rows: string[][];
}

export class SchemaError extends Error {}

export function parseCsv(path: string): Table {
  const text = readFileSync(path, "utf8");
  const lines = text.split("\n").filter((ln) => ln.trim().length > 0);
  if (lines.length < 1) {
    throw new SchemaError(`${path}: empty CSV`);
  }
  const header = lines[0].split(",").map((s) => s.trim());
  const rows = lines.slice(1).map((ln) => ln.split(",").map((s) => s.trim()));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new SchemaError(
        `${path}: row has ${row.length} fields, header has ${header.length}`,
      );
    }
  }
  return { header, rows };
}

/** Columns each figure kind requires (extra columns are allowed). */
export const REQUIRED_COLUMNS: Record<FigureKind, string[]> = {
  heatmap: ["k", "j"],
  decay: ["n", "L", "norm"],
  regression: ["N0"],
  timeseries: ["t", "name", "value"],
};

export function validateSchema(kind: FigureKind, table: Table, path: string): void {
  for (const col of REQUIRED_COLUMNS[kind]) {
    if (!table.header.includes(col)) {
      throw new SchemaError(
        `${path}: kind '${kind}' requires column '${col}', header is [${table.header.join(", ")}]`,
      );
    }
  }
  if (kind === "heatmap" && table.header.length < 3) {
    throw new SchemaError(`${path}: heatmap needs a value column after k, j`);
  }
  if (kind === "regression") {
    const numeric = table.header.filter(
      (c) => c !== "N0" && c.endsWith("_norm"),
    );
    if (numeric.length === 0) {
      throw new SchemaError(
        `${path}: regression needs at least one '*_norm' column`,
      );
    }
  }
}

export function column(table: Table, name: string): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`missing column '${name}'`);
  }
  return table.rows.map((r) => Number(r[idx]));
}

export function textColumn(table: Table, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`missing column '${name}'`);
  }
  return table.rows.map((r) => r[idx]);
}
