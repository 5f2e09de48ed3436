/** Scene -> SVG string. Numbers are emitted with a fixed format so equal
 * scenes always serialize to identical bytes. */

import type { Prim, Scene } from "./scene.js";

const fmt = (v: number): string => {
  const r = Math.round(v * 100) / 100;
  return Object.is(r, -0) ? "0" : String(r);
};

const esc = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

function primToSvg(p: Prim): string {
  switch (p.kind) {
    case "rect":
      return `<rect x="${fmt(p.x)}" y="${fmt(p.y)}" width="${fmt(p.w)}" height="${fmt(p.h)}" fill="${p.fill}"/>`;
    case "polyline": {
      const pts = p.pts.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
      const dash = p.dash ? ` stroke-dasharray="${p.dash.join(" ")}"` : "";
      return `<polyline points="${pts}" fill="none" stroke="${p.stroke}" stroke-width="${fmt(p.width)}"${dash}/>`;
    }
    case "circle":
      return `<circle cx="${fmt(p.cx)}" cy="${fmt(p.cy)}" r="${fmt(p.r)}" fill="${p.fill}"/>`;
    case "text":
      return `<text x="${fmt(p.x)}" y="${fmt(p.y)}" font-size="${p.size}" font-family="Helvetica, Arial, sans-serif" text-anchor="${p.anchor}" fill="${p.fill ?? "#000000"}">${esc(p.s)}</text>`;
  }
}

export function renderSvg(scene: Scene): string {
  const body = scene.prims.map(primToSvg).join("\n");
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${scene.width}" ` +
    `height="${scene.height}" viewBox="0 0 ${scene.width} ${scene.height}">\n` +
    body +
    "\n</svg>\n"
  );
}
