/** Figure rendering: convergence curves from trace CSVs, success-rate sweeps. */

import { writeFileSync } from "node:fs";
import { basename } from "node:path";

import { PALETTE, linearScale, logScale, Scale } from "./chart.js";
import { parseSweep, parseTrace, TraceFile } from "./csv.js";
import { CHAR_H, CHAR_W, Surface } from "./raster.js";

export interface RenderResult {
  outPath: string;
  /** Plotted points per input file, keyed by path. */
  pointCounts: Map<string, number>;
}

const W = 800;
const H = 520;
const MARGIN = { left: 86, right: 24, top: 28, bottom: 56 };
const BLACK: [number, number, number] = [0, 0, 0];
const GRID: [number, number, number] = [224, 224, 224];

interface Series {
  label: string;
  points: { x: number; y: number }[];
}

function drawChart(
  series: Series[],
  opts: { xLabel: string; yLabel: string; logY: boolean; title: string },
): Surface {
  const xs = series.flatMap((s) => s.points.map((p) => p.x));
  let ys = series.flatMap((s) => s.points.map((p) => p.y));
  if (xs.length === 0) throw new Error("nothing to plot");

  let logY = opts.logY;
  if (logY) {
    const positive = ys.filter((y) => y > 0);
    if (positive.length === 0) {
      logY = false; // flat-zero data: fall back rather than fail
    } else {
      // keep exact zeros plottable by clamping to a decade under the minimum
      const floor = Math.min(...positive) / 10;
      series = series.map((s) => ({
        label: s.label,
        points: s.points.map((p) => ({ x: p.x, y: Math.max(p.y, floor) })),
      }));
      ys = series.flatMap((s) => s.points.map((p) => p.y));
    }
  }

  const sx = linearScale(Math.min(...xs), Math.max(...xs), MARGIN.left, W - MARGIN.right);
  const makeY = logY ? logScale : linearScale;
  const sy: Scale = makeY(Math.min(...ys), Math.max(...ys), H - MARGIN.bottom, MARGIN.top);

  const surf = new Surface(W, H);
  for (const t of sx.ticks) {
    surf.line(sx(t), MARGIN.top, sx(t), H - MARGIN.bottom, GRID);
  }
  for (const t of sy.ticks) {
    surf.line(MARGIN.left, sy(t), W - MARGIN.right, sy(t), GRID);
  }
  surf.line(MARGIN.left, MARGIN.top, MARGIN.left, H - MARGIN.bottom, BLACK);
  surf.line(MARGIN.left, H - MARGIN.bottom, W - MARGIN.right, H - MARGIN.bottom, BLACK);
  for (const t of sx.ticks) {
    const label = sx.format(t);
    surf.text(sx(t) - (label.length * CHAR_W) / 2, H - MARGIN.bottom + 8, label, BLACK);
  }
  for (const t of sy.ticks) {
    const label = sy.format(t);
    surf.text(MARGIN.left - 8 - label.length * CHAR_W, sy(t) - CHAR_H / 2, label, BLACK);
  }
  surf.text((W - opts.title.length * CHAR_W) / 2, 8, opts.title, BLACK);
  surf.text(
    (W - opts.xLabel.length * CHAR_W) / 2,
    H - CHAR_H - 8,
    opts.xLabel,
    BLACK,
  );
  const yLab = `${opts.yLabel}${logY ? " (log)" : ""}`;
  surf.text(8, MARGIN.top - CHAR_H - 6, yLab, BLACK);

  series.forEach((s, si) => {
    const color = PALETTE[si % PALETTE.length];
    let prev: { x: number; y: number } | null = null;
    for (const p of s.points) {
      const px = sx(p.x);
      const py = sy(p.y);
      if (prev) surf.line(sx(prev.x), sy(prev.y), px, py, color, 2);
      surf.marker(px, py, color);
      prev = p;
    }
    const ly = MARGIN.top + 6 + si * (CHAR_H + 6);
    const lx = W - MARGIN.right - 150;
    surf.line(lx, ly + CHAR_H / 2, lx + 22, ly + CHAR_H / 2, color, 2);
    surf.text(lx + 28, ly, s.label, BLACK);
  });
  return surf;
}

function traceSeries(trace: TraceFile, yColumn: string): Series {
  if (!trace.columns.includes(yColumn)) {
    throw new Error(`column '${yColumn}' missing in ${trace.path}`);
  }
  const points = trace.rows
    .filter((r) => Number.isFinite(r.iter) && Number.isFinite(r[yColumn]))
    .map((r) => ({ x: r.iter, y: r[yColumn] }));
  return { label: trace.meta.solver ?? basename(trace.path), points };
}

/** One curve per trace file; legend from the solver name in each header. */
export function renderConvergence(
  paths: string[],
  opts: { y?: string; log?: boolean; out: string },
): RenderResult {
  if (paths.length === 0) throw new Error("at least one trace CSV is required");
  const yColumn = opts.y ?? "dist";
  const sorted = [...paths].sort();
  const traces = sorted.map(parseTrace);
  const series = traces.map((t) => traceSeries(t, yColumn));
  const surf = drawChart(series, {
    xLabel: "iteration",
    yLabel: yColumn,
    logY: opts.log ?? true,
    title: "convergence",
  });
  writeFileSync(opts.out, surf.toPng());
  const pointCounts = new Map<string, number>();
  traces.forEach((t, i) => pointCounts.set(t.path, series[i].points.length));
  return { outPath: opts.out, pointCounts };
}

/** Success rate vs theta, one curve per method. */
export function renderSweep(
  paths: string[],
  opts: { log?: boolean; out: string },
): RenderResult {
  if (paths.length !== 1) throw new Error("sweep rendering takes exactly one CSV");
  const sweep = parseSweep(paths[0]);
  const series = [...sweep.series.entries()]
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([method, pts]) => ({
      label: method,
      points: pts.map((p) => ({ x: p.theta, y: p.rate })),
    }));
  const surf = drawChart(series, {
    xLabel: "theta",
    yLabel: "success rate",
    logY: opts.log ?? false,
    title: "sparsity sweep",
  });
  writeFileSync(opts.out, surf.toPng());
  const pointCounts = new Map<string, number>();
  pointCounts.set(
    sweep.path,
    series.reduce((acc, s) => acc + s.points.length, 0),
  );
  return { outPath: opts.out, pointCounts };
}
