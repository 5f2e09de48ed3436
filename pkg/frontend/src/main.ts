/** plotkit entry point.
 *
 * Usage: node dist/main.js <figure-spec.json> [--audit]
 *
 * The spec file holds one FigureSpec or an array of them. Each figure is
 * written as an SVG + PNG pair next to the configured output stem; with
 * --audit an <output>.audit.json records every plotted value and its CSV
 * source (file, column, row). Rendering is deterministic.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { dirname } from "node:path";

import { CsvError } from "./csv.js";
import { buildFigure, FigureError, type FigureSpec } from "./figures.js";
import { renderPng } from "./raster.js";
import { renderSvg } from "./svg.js";

function validateSpec(raw: unknown, index: number): FigureSpec {
  const where = `figure #${index + 1}`;
  if (typeof raw !== "object" || raw === null) {
    throw new FigureError(`${where}: spec must be an object`);
  }
  const spec = raw as Record<string, unknown>;
  const kinds = ["convergence", "line_overlay", "circle_overlay", "contour"];
  if (!kinds.includes(spec.kind as string)) {
    throw new FigureError(`${where}: kind must be one of ${kinds.join(", ")}`);
  }
  if (typeof spec.output !== "string" || spec.output.length === 0) {
    throw new FigureError(`${where}: output stem is required`);
  }
  if (!Array.isArray(spec.inputs) || spec.inputs.length === 0) {
    throw new FigureError(`${where}: inputs must be a non-empty array`);
  }
  for (const inp of spec.inputs) {
    if (typeof (inp as Record<string, unknown>).path !== "string") {
      throw new FigureError(`${where}: every input needs a CSV path`);
    }
  }
  return raw as FigureSpec;
}

export function runSpecFile(path: string, audit: boolean): string[] {
  const raw = JSON.parse(readFileSync(path, "utf8")) as unknown;
  const specs = (Array.isArray(raw) ? raw : [raw]).map(validateSpec);
  const written: string[] = [];
  for (const spec of specs) {
    const { scene, audit: record } = buildFigure(spec);
    mkdirSync(dirname(spec.output) || ".", { recursive: true });
    const svgPath = `${spec.output}.svg`;
    const pngPath = `${spec.output}.png`;
    writeFileSync(svgPath, renderSvg(scene));
    writeFileSync(pngPath, renderPng(scene));
    written.push(svgPath, pngPath);
    if (audit) {
      const auditPath = `${spec.output}.audit.json`;
      writeFileSync(auditPath, JSON.stringify(record, null, 1) + "\n");
      written.push(auditPath);
    }
  }
  return written;
}

export function main(argv: string[]): number {
  const args = argv.filter((a) => a !== "--audit");
  const audit = argv.includes("--audit");
  if (args.length !== 1) {
    console.error("usage: plotkit <figure-spec.json> [--audit]");
    return 2;
  }
  try {
    const written = runSpecFile(args[0], audit);
    for (const w of written) console.log(w);
    return 0;
  } catch (err) {
    if (err instanceof FigureError || err instanceof CsvError
        || err instanceof SyntaxError) {
      console.error(`error: ${(err as Error).message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith("main.js")) {
  process.exit(main(process.argv.slice(2)));
}
