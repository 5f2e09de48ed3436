/** Resolution-independent scene graph shared by the SVG and PNG backends.
 * Figures are assembled as primitives in pixel coordinates; rendering is
 * fully deterministic (no timestamps, no randomness). */

export type Prim =
  | { kind: "rect"; x: number; y: number; w: number; h: number; fill: string }
  | {
      kind: "polyline";
      pts: Array<[number, number]>;
      stroke: string;
      width: number;
      dash?: number[];
    }
  | { kind: "circle"; cx: number; cy: number; r: number; fill: string }
  | {
      kind: "text";
      x: number;
      y: number;
      s: string;
      size: number;
      anchor: "start" | "middle" | "end";
      fill?: string;
    };

export interface Scene {
  width: number;
  height: number;
  prims: Prim[];
}

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#17becf",
];

export interface Scale {
  toPx(v: number): number;
  ticks(): number[];
  readonly log: boolean;
}

export function linearScale(
  lo: number,
  hi: number,
  pxLo: number,
  pxHi: number,
): Scale {
  const span = hi - lo || 1;
  return {
    log: false,
    toPx: (v) => pxLo + ((v - lo) / span) * (pxHi - pxLo),
    ticks: () => niceTicks(lo, hi, 6),
  };
}

export function logScale(
  lo: number,
  hi: number,
  pxLo: number,
  pxHi: number,
): Scale {
  if (lo <= 0 || hi <= 0) throw new Error("log scale needs positive bounds");
  const [a, b] = [Math.log10(lo), Math.log10(hi)];
  const span = b - a || 1;
  return {
    log: true,
    toPx: (v) => pxLo + ((Math.log10(v) - a) / span) * (pxHi - pxLo),
    ticks: () => {
      const out: number[] = [];
      for (let e = Math.ceil(a - 1e-9); e <= Math.floor(b + 1e-9); e++) {
        out.push(10 ** e);
      }
      return out.length >= 2 ? out : [lo, hi];
    },
  };
}

export function niceTicks(lo: number, hi: number, n: number): number[] {
  const span = hi - lo || 1;
  const step0 = span / Math.max(n - 1, 1);
  const mag = 10 ** Math.floor(Math.log10(step0));
  const candidates = [1, 2, 2.5, 5, 10].map((m) => m * mag);
  const step = candidates.find((s) => span / s <= n) ?? candidates[4];
  const first = Math.ceil(lo / step) * step;
  const out: number[] = [];
  for (let v = first; v <= hi + 1e-12 * span; v += step) {
    out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
  }
  return out;
}

export function formatTick(v: number, log: boolean): string {
  if (log) {
    const e = Math.round(Math.log10(v));
    return `1e${e}`;
  }
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(1);
  return parseFloat(v.toPrecision(6)).toString();
}

export interface AxesOptions {
  width?: number;
  height?: number;
  title: string;
  xLabel: string;
  yLabel: string;
  xLog?: boolean;
  yLog?: boolean;
  xRange: [number, number];
  yRange: [number, number];
}

export interface Axes {
  scene: Scene;
  x: Scale;
  y: Scale;
  plot: { x0: number; x1: number; y0: number; y1: number };
}

/** Frame, ticks, labels and title; figure content draws on top. */
export function makeAxes(opts: AxesOptions): Axes {
  const width = opts.width ?? 640;
  const height = opts.height ?? 480;
  const m = { left: 72, right: 16, top: 34, bottom: 48 };
  const plot = {
    x0: m.left,
    x1: width - m.right,
    y0: m.top,
    y1: height - m.bottom,
  };
  const x = (opts.xLog ? logScale : linearScale)(
    opts.xRange[0],
    opts.xRange[1],
    plot.x0,
    plot.x1,
  );
  const y = (opts.yLog ? logScale : linearScale)(
    opts.yRange[0],
    opts.yRange[1],
    plot.y1,
    plot.y0, // pixel y grows downward
  );
  const prims: Prim[] = [
    { kind: "rect", x: 0, y: 0, w: width, h: height, fill: "#ffffff" },
  ];
  for (const tv of x.ticks()) {
    const px = x.toPx(tv);
    prims.push({
      kind: "polyline",
      pts: [
        [px, plot.y0],
        [px, plot.y1],
      ],
      stroke: "#dddddd",
      width: 1,
    });
    prims.push({
      kind: "text",
      x: px,
      y: plot.y1 + 16,
      s: formatTick(tv, x.log),
      size: 11,
      anchor: "middle",
    });
  }
  for (const tv of y.ticks()) {
    const py = y.toPx(tv);
    prims.push({
      kind: "polyline",
      pts: [
        [plot.x0, py],
        [plot.x1, py],
      ],
      stroke: "#dddddd",
      width: 1,
    });
    prims.push({
      kind: "text",
      x: plot.x0 - 6,
      y: py + 4,
      s: formatTick(tv, y.log),
      size: 11,
      anchor: "end",
    });
  }
  prims.push({
    kind: "polyline",
    pts: [
      [plot.x0, plot.y0],
      [plot.x0, plot.y1],
      [plot.x1, plot.y1],
      [plot.x1, plot.y0],
      [plot.x0, plot.y0],
    ],
    stroke: "#000000",
    width: 1,
  });
  prims.push({
    kind: "text",
    x: (plot.x0 + plot.x1) / 2,
    y: 20,
    s: opts.title,
    size: 14,
    anchor: "middle",
  });
  prims.push({
    kind: "text",
    x: (plot.x0 + plot.x1) / 2,
    y: height - 12,
    s: opts.xLabel,
    size: 12,
    anchor: "middle",
  });
  prims.push({
    kind: "text",
    x: 14,
    y: plot.y0 - 12,
    s: opts.yLabel,
    size: 12,
    anchor: "start",
  });
  return { scene: { width, height, prims }, x, y, plot };
}

export function addLegend(
  axes: Axes,
  entries: Array<{ label: string; color: string; dash?: number[] }>,
): void {
  const x0 = axes.plot.x0 + 10;
  let y = axes.plot.y0 + 16;
  for (const e of entries) {
    axes.scene.prims.push({
      kind: "polyline",
      pts: [
        [x0, y - 4],
        [x0 + 26, y - 4],
      ],
      stroke: e.color,
      width: 2,
      dash: e.dash,
    });
    axes.scene.prims.push({
      kind: "text",
      x: x0 + 32,
      y,
      s: e.label,
      size: 11,
      anchor: "start",
    });
    y += 16;
  }
}
