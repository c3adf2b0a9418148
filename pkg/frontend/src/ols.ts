/** Ordinary least squares on (x, log2 y) pairs.
 *
 * Same formula as the solver-side regression, so figures and tests agree:
 * slope = sum (x - xbar)(y - ybar) / sum (x - xbar)^2, with the standard
 * error sqrt(rss / (n - 2) / sum (x - xbar)^2).
 */

export interface Fit {
  slope: number;
  intercept: number;
  stderr: number;
}

export function olsLog2(x: number[], yRaw: number[]): Fit {
  if (x.length !== yRaw.length || x.length < 2) {
    throw new Error(`need matching x/y with >= 2 points, got ${x.length}`);
  }
  const y = yRaw.map((v) => Math.log2(v));
  const n = x.length;
  const xbar = x.reduce((a, b) => a + b, 0) / n;
  const ybar = y.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  const slope = sxy / sxx;
  const intercept = ybar - slope * xbar;
  let rss = 0;
  for (let i = 0; i < n; i++) {
    const r = y[i] - (intercept + slope * x[i]);
    rss += r * r;
  }
  const stderr = n > 2 ? Math.sqrt(rss / (n - 2) / sxx) : 0;
  return { slope, intercept, stderr };
}
