/** figkit CLI: `figkit <kind> <csv> <out.svg>`.
 *
 * kinds: heatmap | decay | regression | timeseries.  The input CSV is read
 * only; the rendered SVG is written to the output path.
 */

import { writeFileSync } from "node:fs";

import { FigureKind, REQUIRED_COLUMNS, SchemaError, parseCsv } from "./csv.js";
import { renderJob } from "./render.js";

export function main(argv: string[]): number {
  if (argv.length !== 3) {
    process.stderr.write(
      "usage: figkit <heatmap|decay|regression|timeseries> <csv> <out.svg>\n",
    );
    return 2;
  }
  const [kind, csvPath, outPath] = argv;
  if (!(kind in REQUIRED_COLUMNS)) {
    process.stderr.write(`unknown figure kind '${kind}'\n`);
    return 2;
  }
  try {
    const table = parseCsv(csvPath);
    const svg = renderJob(table, {
      kind: kind as FigureKind,
      csvPath,
      outPath,
    });
    writeFileSync(outPath, svg);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`schema error: ${err.message}\n`);
      return 3;
    }
    process.stderr.write(`error: ${String(err)}\n`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
