/** Scene -> PNG bytes without native canvas: primitives are rasterized
 * into an RGBA buffer (Bresenham lines, filled rects/discs, a 5x7 bitmap
 * font) and encoded with node:zlib. Deterministic by construction. */

import { deflateSync } from "node:zlib";

import type { Prim, Scene } from "./scene.js";

// 5x7 glyphs, one number per row (5 LSBs used), covering what figures need
const GLYPHS: Record<string, number[]> = {
  "0": [14, 17, 19, 21, 25, 17, 14],
  "1": [4, 12, 4, 4, 4, 4, 14],
  "2": [14, 17, 1, 2, 4, 8, 31],
  "3": [14, 17, 1, 6, 1, 17, 14],
  "4": [2, 6, 10, 18, 31, 2, 2],
  "5": [31, 16, 30, 1, 1, 17, 14],
  "6": [6, 8, 16, 30, 17, 17, 14],
  "7": [31, 1, 2, 4, 8, 8, 8],
  "8": [14, 17, 17, 14, 17, 17, 14],
  "9": [14, 17, 17, 15, 1, 2, 12],
  ".": [0, 0, 0, 0, 0, 12, 12],
  ",": [0, 0, 0, 0, 12, 4, 8],
  "-": [0, 0, 0, 31, 0, 0, 0],
  "+": [0, 4, 4, 31, 4, 4, 0],
  "=": [0, 0, 31, 0, 31, 0, 0],
  "/": [1, 1, 2, 4, 8, 16, 16],
  "(": [2, 4, 8, 8, 8, 4, 2],
  ")": [8, 4, 2, 2, 2, 4, 8],
  " ": [0, 0, 0, 0, 0, 0, 0],
  e: [0, 0, 14, 17, 31, 16, 14],
  s: [0, 0, 15, 16, 14, 1, 30],
  l: [12, 4, 4, 4, 4, 4, 14],
  o: [0, 0, 14, 17, 17, 17, 14],
  p: [0, 0, 30, 17, 30, 16, 16],
  x: [0, 0, 17, 10, 4, 10, 17],
  y: [0, 0, 17, 17, 15, 1, 14],
  z: [0, 0, 31, 2, 4, 8, 31],
  E: [31, 16, 16, 30, 16, 16, 31],
  B: [30, 17, 17, 30, 17, 17, 30],
  N: [17, 25, 21, 19, 17, 17, 17],
  L: [16, 16, 16, 16, 16, 16, 31],
  "1e": [0, 0, 0, 0, 0, 0, 0], // placeholder, multi-char handled by loop
};

function colorToRgb(c: string): [number, number, number] {
  if (c.startsWith("#") && c.length === 7) {
    return [
      parseInt(c.slice(1, 3), 16),
      parseInt(c.slice(3, 5), 16),
      parseInt(c.slice(5, 7), 16),
    ];
  }
  return [0, 0, 0];
}

class Canvas {
  buf: Uint8Array;
  constructor(
    readonly w: number,
    readonly h: number,
  ) {
    this.buf = new Uint8Array(w * h * 3).fill(255);
  }

  set(x: number, y: number, rgb: [number, number, number]): void {
    const xi = Math.round(x);
    const yi = Math.round(y);
    if (xi < 0 || yi < 0 || xi >= this.w || yi >= this.h) return;
    const o = (yi * this.w + xi) * 3;
    this.buf[o] = rgb[0];
    this.buf[o + 1] = rgb[1];
    this.buf[o + 2] = rgb[2];
  }

  disc(cx: number, cy: number, r: number, rgb: [number, number, number]): void {
    for (let y = Math.floor(cy - r); y <= cy + r; y++) {
      for (let x = Math.floor(cx - r); x <= cx + r; x++) {
        if ((x - cx) ** 2 + (y - cy) ** 2 <= r * r) this.set(x, y, rgb);
      }
    }
  }

  line(
    x1: number,
    y1: number,
    x2: number,
    y2: number,
    rgb: [number, number, number],
    width: number,
  ): void {
    let x = Math.round(x1);
    let y = Math.round(y1);
    const xe = Math.round(x2);
    const ye = Math.round(y2);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    const r = Math.max(0, Math.round(width / 2) - 1);
    for (;;) {
      if (r === 0) this.set(x, y, rgb);
      else this.disc(x, y, r + 0.5, rgb);
      if (x === xe && y === ye) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  glyph(ch: string, x: number, y: number, scale: number, rgb: [number, number, number]): void {
    const rows = GLYPHS[ch] ?? GLYPHS["-"];
    for (let r = 0; r < 7; r++) {
      for (let c = 0; c < 5; c++) {
        if ((rows[r] >> (4 - c)) & 1) {
          for (let dy = 0; dy < scale; dy++) {
            for (let dx = 0; dx < scale; dx++) {
              this.set(x + c * scale + dx, y + r * scale + dy, rgb);
            }
          }
        }
      }
    }
  }

  text(
    s: string,
    x: number,
    y: number,
    size: number,
    anchor: "start" | "middle" | "end",
    rgb: [number, number, number],
  ): void {
    const scale = Math.max(1, Math.round(size / 8));
    const adv = 6 * scale;
    const total = s.length * adv;
    let x0 = x;
    if (anchor === "middle") x0 -= total / 2;
    if (anchor === "end") x0 -= total;
    const y0 = y - 7 * scale; // baseline-ish
    for (let i = 0; i < s.length; i++) {
      const ch = s[i];
      this.glyph(ch in GLYPHS ? ch : ch.toLowerCase(), x0 + i * adv, y0, scale, rgb);
    }
  }
}

function crc32(data: Uint8Array): number {
  let crc = ~0;
  for (let i = 0; i < data.length; i++) {
    crc ^= data[i];
    for (let k = 0; k < 8; k++) {
      crc = (crc >>> 1) ^ (0xedb88320 & -(crc & 1));
    }
  }
  return ~crc >>> 0;
}

function chunk(type: string, payload: Uint8Array): Uint8Array {
  const out = new Uint8Array(12 + payload.length);
  const dv = new DataView(out.buffer);
  dv.setUint32(0, payload.length);
  for (let i = 0; i < 4; i++) out[4 + i] = type.charCodeAt(i);
  out.set(payload, 8);
  const crcInput = out.subarray(4, 8 + payload.length);
  dv.setUint32(8 + payload.length, crc32(crcInput));
  return out;
}

export function encodePng(rgb: Uint8Array, w: number, h: number): Buffer {
  const ihdr = new Uint8Array(13);
  const dv = new DataView(ihdr.buffer);
  dv.setUint32(0, w);
  dv.setUint32(4, h);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 2; // truecolor
  const raw = new Uint8Array(h * (1 + w * 3));
  for (let y = 0; y < h; y++) {
    raw[y * (1 + w * 3)] = 0; // filter none
    raw.set(rgb.subarray(y * w * 3, (y + 1) * w * 3), y * (1 + w * 3) + 1);
  }
  const idat = deflateSync(raw, { level: 9 });
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", new Uint8Array(idat)),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

export function renderPng(scene: Scene): Buffer {
  const cv = new Canvas(scene.width, scene.height);
  for (const p of scene.prims) {
    switch (p.kind) {
      case "rect": {
        const rgb = colorToRgb(p.fill);
        for (let y = Math.round(p.y); y < Math.round(p.y + p.h); y++) {
          for (let x = Math.round(p.x); x < Math.round(p.x + p.w); x++) {
            cv.set(x, y, rgb);
          }
        }
        break;
      }
      case "polyline": {
        const rgb = colorToRgb(p.stroke);
        for (let i = 0; i + 1 < p.pts.length; i++) {
          cv.line(
            p.pts[i][0],
            p.pts[i][1],
            p.pts[i + 1][0],
            p.pts[i + 1][1],
            rgb,
            p.width,
          );
        }
        break;
      }
      case "circle":
        cv.disc(p.cx, p.cy, p.r, colorToRgb(p.fill));
        break;
      case "text":
        cv.text(p.s, p.x, p.y, p.size, p.anchor, colorToRgb(p.fill ?? "#000000"));
        break;
    }
  }
  return encodePng(cv.buf, scene.width, scene.height);
}

export { Prim };
