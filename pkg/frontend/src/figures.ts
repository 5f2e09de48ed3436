/** Figure builders. Every plotted number comes straight from a CSV cell;
 * the audit record lists them with their source rows. The only derived
 * annotation is the least-squares slope of a convergence series, computed
 * from the plotted points themselves. */

import { numericColumn, readCsv, type Table } from "./csv.js";
import {
  addLegend,
  makeAxes,
  PALETTE,
  type Axes,
  type Scene,
} from "./scene.js";

export interface SeriesSpec {
  path: string;
  label?: string;
  x?: string;
  y?: string;
}

export interface FigureSpec {
  kind: "convergence" | "line_overlay" | "circle_overlay" | "contour";
  output: string;
  inputs: SeriesSpec[];
  title?: string;
  xLabel?: string;
  yLabel?: string;
  /** contour only: the value column */
  value?: string;
}

export interface AuditSeries {
  label: string;
  path: string;
  xColumn: string;
  yColumn: string;
  rows: number[];
  x: number[];
  y: number[];
}

export interface Audit {
  figure: string;
  kind: string;
  series: AuditSeries[];
  annotations: Array<{ text: string; value: number }>;
}

export class FigureError extends Error {}

interface Loaded {
  table: Table;
  label: string;
  x: number[];
  y: number[];
  xName: string;
  yName: string;
}

function loadSeries(
  spec: SeriesSpec,
  defaultX: string,
  defaultY: string,
): Loaded {
  const table = readCsv(spec.path);
  const xName = spec.x ?? defaultX;
  const yName = spec.y ?? defaultY;
  return {
    table,
    label: spec.label ?? spec.path.replace(/^.*\//, ""),
    x: numericColumn(table, xName),
    y: numericColumn(table, yName),
    xName,
    yName,
  };
}

function auditOf(figure: string, kind: string, loaded: Loaded[]): Audit {
  return {
    figure,
    kind,
    series: loaded.map((s) => ({
      label: s.label,
      path: s.table.path,
      xColumn: s.xName,
      yColumn: s.yName,
      rows: s.x.map((_, i) => i + 2), // 1-based CSV line numbers, after header
      x: s.x,
      y: s.y,
    })),
    annotations: [],
  };
}

export function fitSlope(n: number[], err: number[]): number {
  // least-squares slope of log(error) against log(1/N)
  const xs = n.map((v) => Math.log(1 / v));
  const ys = err.map(Math.log);
  const mx = xs.reduce((a, b) => a + b, 0) / xs.length;
  const my = ys.reduce((a, b) => a + b, 0) / ys.length;
  let num = 0;
  let den = 0;
  for (let i = 0; i < xs.length; i++) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) ** 2;
  }
  return num / den;
}

function range(vals: number[]): [number, number] {
  return [Math.min(...vals), Math.max(...vals)];
}

function padLog(r: [number, number]): [number, number] {
  return [r[0] / 1.5, r[1] * 1.5];
}

function padLin(r: [number, number]): [number, number] {
  const span = r[1] - r[0] || 1;
  return [r[0] - 0.05 * span, r[1] + 0.05 * span];
}

function drawSeries(axes: Axes, loaded: Loaded[], markers: boolean): void {
  loaded.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = s.x.map(
      (v, j) => [axes.x.toPx(v), axes.y.toPx(s.y[j])] as [number, number],
    );
    axes.scene.prims.push({ kind: "polyline", pts, stroke: color, width: 2 });
    if (markers) {
      for (const [px, py] of pts) {
        axes.scene.prims.push({
          kind: "circle",
          cx: px,
          cy: py,
          r: 3,
          fill: color,
        });
      }
    }
  });
  addLegend(
    axes,
    loaded.map((s, i) => ({ label: s.label, color: PALETTE[i % PALETTE.length] })),
  );
}

export function buildConvergence(spec: FigureSpec): { scene: Scene; audit: Audit } {
  if (spec.inputs.length === 0) throw new FigureError("convergence needs inputs");
  const loaded = spec.inputs.map((s) => loadSeries(s, "n", "l1_error"));
  for (const s of loaded) {
    if (s.x.length < 2) throw new FigureError(`${s.table.path}: need >= 2 points`);
    if (s.y.some((v) => v <= 0)) {
      throw new FigureError(`${s.table.path}: errors must be positive`);
    }
  }
  const xr = padLog(range(loaded.flatMap((s) => s.x)));
  const yr = padLog(range(loaded.flatMap((s) => s.y)));
  const axes = makeAxes({
    title: spec.title ?? "L1 error vs resolution",
    xLabel: spec.xLabel ?? "N",
    yLabel: spec.yLabel ?? "L1 error",
    xLog: true,
    yLog: true,
    xRange: xr,
    yRange: yr,
  });
  drawSeries(axes, loaded, true);
  const audit = auditOf(spec.output, spec.kind, loaded);
  loaded.forEach((s, i) => {
    const slope = fitSlope(s.x, s.y);
    const text = `slope = ${slope.toFixed(2)}`;
    audit.annotations.push({ text: `${s.label}: ${text}`, value: slope });
    axes.scene.prims.push({
      kind: "text",
      x: axes.plot.x1 - 8,
      y: axes.plot.y0 + 16 + 16 * i,
      s: text,
      size: 12,
      anchor: "end",
      fill: PALETTE[i % PALETTE.length],
    });
  });
  return { scene: axes.scene, audit };
}

export function buildOverlay(spec: FigureSpec): { scene: Scene; audit: Audit } {
  if (spec.inputs.length === 0) throw new FigureError("overlay needs inputs");
  const circle = spec.kind === "circle_overlay";
  const loaded = spec.inputs.map((s) =>
    loadSeries(s, circle ? "theta" : "s", "Ez"),
  );
  const axes = makeAxes({
    title: spec.title ?? (circle ? "circle extraction" : "line extraction"),
    xLabel: spec.xLabel ?? (circle ? "theta" : "line parameter"),
    yLabel: spec.yLabel ?? loaded[0].yName,
    xRange: padLin(range(loaded.flatMap((s) => s.x))),
    yRange: padLin(range(loaded.flatMap((s) => s.y))),
  });
  drawSeries(axes, loaded, false);
  return { scene: axes.scene, audit: auditOf(spec.output, spec.kind, loaded) };
}

const COLORMAP: Array<[number, number, number]> = [
  [48, 18, 59],
  [70, 107, 227],
  [40, 187, 236],
  [115, 239, 145],
  [229, 220, 50],
  [250, 122, 31],
  [122, 4, 3],
];

function heatColor(t: number): string {
  const x = Math.min(1, Math.max(0, t)) * (COLORMAP.length - 1);
  const i = Math.min(COLORMAP.length - 2, Math.floor(x));
  const f = x - i;
  const mix = (a: number, b: number) => Math.round(a + f * (b - a));
  const [r, g, b] = [0, 1, 2].map((c) => mix(COLORMAP[i][c], COLORMAP[i + 1][c]));
  return `#${[r, g, b].map((v) => v.toString(16).padStart(2, "0")).join("")}`;
}

export function buildContour(spec: FigureSpec): { scene: Scene; audit: Audit } {
  if (spec.inputs.length !== 1) {
    throw new FigureError("contour takes exactly one input CSV");
  }
  const valueName = spec.value ?? "Ez";
  const table = readCsv(spec.inputs[0].path);
  const xs = numericColumn(table, spec.inputs[0].x ?? "x");
  const ys = numericColumn(table, spec.inputs[0].y ?? "y");
  const vs = numericColumn(table, valueName);
  const ux = [...new Set(xs)].sort((a, b) => a - b);
  const uy = [...new Set(ys)].sort((a, b) => a - b);
  if (ux.length * uy.length !== xs.length) {
    throw new FigureError(
      `${table.path}: points do not form a full ${ux.length}x${uy.length} grid`,
    );
  }
  const [vlo, vhi] = range(vs);
  const axes = makeAxes({
    title: spec.title ?? `${valueName} slice`,
    xLabel: spec.xLabel ?? "x",
    yLabel: spec.yLabel ?? "y",
    xRange: range(xs),
    yRange: range(ys),
  });
  const cw = (axes.plot.x1 - axes.plot.x0) / ux.length;
  const ch = (axes.plot.y1 - axes.plot.y0) / uy.length;
  const xi = new Map(ux.map((v, i) => [v, i]));
  const yi = new Map(uy.map((v, i) => [v, i]));
  for (let k = 0; k < xs.length; k++) {
    const i = xi.get(xs[k])!;
    const j = yi.get(ys[k])!;
    const t = vhi > vlo ? (vs[k] - vlo) / (vhi - vlo) : 0.5;
    axes.scene.prims.push({
      kind: "rect",
      x: axes.plot.x0 + i * cw,
      y: axes.plot.y1 - (j + 1) * ch,
      w: cw + 0.5,
      h: ch + 0.5,
      fill: heatColor(t),
    });
  }
  axes.scene.prims.push({
    kind: "text",
    x: axes.plot.x1 - 8,
    y: axes.plot.y0 + 16,
    s: `${valueName} in (${vlo.toPrecision(3)}, ${vhi.toPrecision(3)})`,
    size: 11,
    anchor: "end",
  });
  const loaded: Loaded[] = [
    {
      table,
      label: valueName,
      x: xs,
      y: vs,
      xName: spec.inputs[0].x ?? "x",
      yName: valueName,
    },
  ];
  return { scene: axes.scene, audit: auditOf(spec.output, spec.kind, loaded) };
}

export function buildFigure(spec: FigureSpec): { scene: Scene; audit: Audit } {
  switch (spec.kind) {
    case "convergence":
      return buildConvergence(spec);
    case "line_overlay":
    case "circle_overlay":
      return buildOverlay(spec);
    case "contour":
      return buildContour(spec);
    default:
      throw new FigureError(`unknown figure kind ${(spec as FigureSpec).kind}`);
  }
}
