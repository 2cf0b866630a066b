/** Chart geometry as pure functions.
 *
 * Everything here maps served numbers into SVG coordinates and path
 * strings; no statistics happen on this side of the wire. The DOM layer
 * drops the returned paths into <svg> elements verbatim, and the node
 * test suite checks the geometry without a browser.
 */

export interface Tick {
  value: number;
  pos: number;
}

export interface Frame {
  width: number;
  height: number;
  pad: number;
}

export const TRACE_FRAME: Frame = { width: 560, height: 220, pad: 36 };
export const SLICE_FRAME: Frame = { width: 560, height: 240, pad: 36 };

/** Linear map with a degenerate-domain guard: a flat domain lands every
 * point mid-range instead of dividing by zero. */
export function scaleLinear(
  d0: number,
  d1: number,
  r0: number,
  r1: number,
): (value: number) => number {
  const span = d1 - d0;
  if (span === 0) {
    const mid = (r0 + r1) / 2;
    return () => mid;
  }
  return (value: number) => r0 + ((value - d0) / span) * (r1 - r0);
}

/** Round tick positions covering [lo, hi], stepped by 1/2/5 decades. */
export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    return [];
  }
  if (lo === hi) {
    return [lo];
  }
  const span = hi - lo;
  const rawStep = span / Math.max(1, count);
  const magnitude = Math.pow(10, Math.floor(Math.log10(rawStep)));
  let step = magnitude;
  for (const factor of [1, 2, 5, 10]) {
    step = factor * magnitude;
    if (step >= rawStep) {
      break;
    }
  }
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let value = first; value <= hi + step * 1e-9; value += step) {
    ticks.push(Math.abs(value) < step * 1e-9 ? 0 : value);
  }
  return ticks;
}

export function formatValue(value: number): string {
  if (value === 0) {
    return "0";
  }
  const abs = Math.abs(value);
  if (abs >= 1e5 || abs < 1e-3) {
    return value.toExponential(2);
  }
  return String(Number(value.toPrecision(6)));
}

export function polylinePath(xs: number[], ys: number[]): string {
  const parts: string[] = [];
  for (let i = 0; i < xs.length; i += 1) {
    parts.push(`${i === 0 ? "M" : "L"}${xs[i]},${ys[i]}`);
  }
  return parts.join(" ");
}

export interface TraceChart {
  frame: Frame;
  /** Observation number (1-based) of each drawn point. */
  indices: number[];
  values: number[];
  xs: number[];
  ys: number[];
  path: string;
  xTicks: Tick[];
  yTicks: Tick[];
}

/** Best-so-far line from the served trace. Entries are null before any
 * feasible observation exists; those rows are simply not drawn. Returns
 * null when there is nothing to draw at all. */
export function traceChart(
  trace: Array<number | null>,
  frame: Frame = TRACE_FRAME,
): TraceChart | null {
  const indices: number[] = [];
  const values: number[] = [];
  trace.forEach((value, i) => {
    if (value !== null && Number.isFinite(value)) {
      indices.push(i + 1);
      values.push(value);
    }
  });
  if (values.length === 0) {
    return null;
  }
  const { width, height, pad } = frame;
  const x = scaleLinear(1, Math.max(trace.length, 2), pad, width - pad);
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (lo === hi) {
    const margin = Math.max(1, Math.abs(lo)) * 0.05;
    lo -= margin;
    hi += margin;
  }
  const y = scaleLinear(lo, hi, height - pad, pad);
  const xs = indices.map(x);
  const ys = values.map(y);
  return {
    frame,
    indices,
    values,
    xs,
    ys,
    path: polylinePath(xs, ys),
    xTicks: niceTicks(1, trace.length, 6)
      .filter((v) => Number.isInteger(v) && v >= 1)
      .map((v) => ({ value: v, pos: x(v) })),
    yTicks: niceTicks(lo, hi, 5).map((v) => ({ value: v, pos: y(v) })),
  };
}

export interface SliceLike {
  grid: number[];
  mean: number[];
  lower: number[];
  upper: number[];
}

export interface SliceChart {
  frame: Frame;
  xs: number[];
  meanYs: number[];
  lowerYs: number[];
  upperYs: number[];
  meanPath: string;
  bandPath: string;
  anchorX: number | null;
  xTicks: Tick[];
  yTicks: Tick[];
}

/** Posterior slice: mean line plus a closed band polygon between the
 * served lower and upper curves. */
export function sliceChart(
  slice: SliceLike,
  frame: Frame = SLICE_FRAME,
  anchorValue: number | null = null,
): SliceChart {
  const { width, height, pad } = frame;
  const grid = slice.grid;
  const x = scaleLinear(grid[0], grid[grid.length - 1], pad, width - pad);
  let lo = Math.min(...slice.lower);
  let hi = Math.max(...slice.upper);
  if (lo === hi) {
    const margin = Math.max(1, Math.abs(lo)) * 0.05;
    lo -= margin;
    hi += margin;
  }
  const y = scaleLinear(lo, hi, height - pad, pad);
  const xs = grid.map(x);
  const meanYs = slice.mean.map(y);
  const lowerYs = slice.lower.map(y);
  const upperYs = slice.upper.map(y);

  const upperEdge = polylinePath(xs, upperYs);
  const backXs = [...xs].reverse();
  const backYs = [...lowerYs].reverse();
  const lowerEdge = backXs
    .map((bx, i) => `L${bx},${backYs[i]}`)
    .join(" ");
  const bandPath = `${upperEdge} ${lowerEdge} Z`;

  return {
    frame,
    xs,
    meanYs,
    lowerYs,
    upperYs,
    meanPath: polylinePath(xs, meanYs),
    bandPath,
    anchorX: anchorValue === null ? null : x(anchorValue),
    xTicks: niceTicks(grid[0], grid[grid.length - 1], 6).map((v) => ({
      value: v,
      pos: x(v),
    })),
    yTicks: niceTicks(lo, hi, 5).map((v) => ({ value: v, pos: y(v) })),
  };
}
