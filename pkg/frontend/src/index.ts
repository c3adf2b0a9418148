export { parseCsv, validateSchema, REQUIRED_COLUMNS, SchemaError } from "./csv.js";
export type { FigureKind, Table } from "./csv.js";
export { olsLog2 } from "./ols.js";
export type { Fit } from "./ols.js";
export { renderJob, regressionFit } from "./render.js";
export type { FigureJob, RegressionAnnotation } from "./render.js";
export { main } from "./cli.js";
