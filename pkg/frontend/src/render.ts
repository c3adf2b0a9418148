/** Figure builders: echarts server-side SVG rendering, one job per call.
 *
 * Inputs are never mutated; identical inputs render byte-identical SVG for a
 * pinned echarts version (each CLI invocation is a fresh process).
 */

import * as echarts from "echarts";

type EChartsOption = echarts.EChartsOption;
type SeriesOption = echarts.SeriesOption;

import { FigureKind, Table, column, textColumn, validateSchema } from "./csv.js";
import { olsLog2 } from "./ols.js";

export interface FigureJob {
  csvPath: string;
  kind: FigureKind;
  outPath: string;
  xLabel?: string;
  yLabel?: string;
}

const WIDTH = 760;
const HEIGHT = 520;

function renderOption(option: EChartsOption): string {
  const chart = echarts.init(null, null, {
    renderer: "svg",
    ssr: true,
    width: WIDTH,
    height: HEIGHT,
  });
  chart.setOption(option);
  const svg = chart.renderToSVGString();
  chart.dispose();
  return svg;
}

export function heatmapOption(table: Table, job: FigureJob): EChartsOption {
  const ks = column(table, "k");
  const js = column(table, "j");
  const valueCol = table.header.find((c) => c !== "k" && c !== "j" && c !== "p");
  const vals = column(table, valueCol as string);
  const kTicks = [...new Set(ks)].sort((a, b) => a - b);
  const jTicks = [...new Set(js)].sort((a, b) => a - b);
  const data = ks.map((k, i) => [kTicks.indexOf(k), jTicks.indexOf(js[i]), vals[i]]);
  const vmax = Math.max(...vals, 0);
  return {
    animation: false,
    title: { text: "block energies" },
    xAxis: { type: "category", data: kTicks.map(String), name: job.xLabel ?? "k" },
    yAxis: { type: "category", data: jTicks.map(String), name: job.yLabel ?? "j" },
    visualMap: {
      min: 0,
      max: vmax > 0 ? vmax : 1,
      calculable: false,
      orient: "vertical",
      right: 8,
    },
    series: [{ type: "heatmap", data }],
  };
}

export function decayOption(table: Table, job: FigureJob): EChartsOption {
  const ns = column(table, "n");
  const ls = column(table, "L");
  const norms = column(table, "norm");
  const series: SeriesOption[] = [];
  for (const n of [...new Set(ns)].sort((a, b) => a - b)) {
    const pts: [number, number][] = [];
    for (let i = 0; i < ns.length; i++) {
      if (ns[i] === n) pts.push([ls[i], norms[i]]);
    }
    pts.sort((a, b) => a[0] - b[0]);
    series.push({ type: "line", name: `n=${n}`, data: pts });
  }
  return {
    animation: false,
    title: { text: "remainder decay" },
    legend: { top: 24 },
    xAxis: { type: "value", name: job.xLabel ?? "L" },
    yAxis: { type: "value", name: job.yLabel ?? "norm" },
    series,
  };
}

export interface RegressionAnnotation {
  column: string;
  slope: number;
  stderr: number;
}

export function regressionFit(table: Table): RegressionAnnotation[] {
  const x = column(table, "N0");
  const out: RegressionAnnotation[] = [];
  for (const col of table.header) {
    if (col === "N0" || !col.endsWith("_norm")) continue;
    const y = column(table, col);
    const keep = y.map((v, i) => [x[i], v]).filter(([, v]) => v > 0);
    if (keep.length < 2) continue;
    const fit = olsLog2(keep.map((p) => p[0]), keep.map((p) => p[1]));
    out.push({ column: col, slope: fit.slope, stderr: fit.stderr });
  }
  return out;
}

export function regressionOption(table: Table, job: FigureJob): EChartsOption {
  const x = column(table, "N0");
  const fits = regressionFit(table);
  const series: SeriesOption[] = [];
  for (const fit of fits) {
    const y = column(table, fit.column);
    const pts = x
      .map((xv, i) => [xv, Math.log2(y[i])] as [number, number])
      .filter(([, v]) => Number.isFinite(v));
    series.push({ type: "scatter", name: fit.column, data: pts });
  }
  const annotation = fits
    .map(
      (f) =>
        `${f.column}: slope=${f.slope.toPrecision(15)} stderr=${f.stderr.toPrecision(6)}`,
    )
    .join("  |  ");
  return {
    animation: false,
    title: { text: "gate regression", subtext: annotation },
    legend: { top: 48 },
    xAxis: { type: "value", name: job.xLabel ?? "N0" },
    yAxis: { type: "value", name: job.yLabel ?? "log2 norm" },
    series,
  };
}

export function timeseriesOption(table: Table, job: FigureJob): EChartsOption {
  const t = column(table, "t");
  const names = textColumn(table, "name");
  const values = column(table, "value");
  const series: SeriesOption[] = [];
  for (const name of [...new Set(names)].sort()) {
    const pts: [number, number][] = [];
    for (let i = 0; i < t.length; i++) {
      if (names[i] === name) pts.push([t[i], values[i]]);
    }
    pts.sort((a, b) => a[0] - b[0]);
    series.push({ type: "line", name, data: pts });
  }
  return {
    animation: false,
    title: { text: "solver monitors" },
    legend: { top: 24 },
    xAxis: { type: "value", name: job.xLabel ?? "t" },
    yAxis: { type: "value", name: job.yLabel ?? "value" },
    series,
  };
}

const BUILDERS: Record<FigureKind, (t: Table, j: FigureJob) => EChartsOption> = {
  heatmap: heatmapOption,
  decay: decayOption,
  regression: regressionOption,
  timeseries: timeseriesOption,
};

export function renderJob(table: Table, job: FigureJob): string {
  validateSchema(job.kind, table, job.csvPath);
  return renderOption(BUILDERS[job.kind](table, job));
}
