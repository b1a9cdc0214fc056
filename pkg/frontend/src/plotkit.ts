// FigureSpec validation and dispatch: each figure kind declares which CSV
// inputs it consumes and under which schema, inputs are read and checked
// before any drawing happens, and the result is a deterministic SVG string.

import { existsSync, mkdirSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { Row, readCsv } from "./csv.js";
import {
  FigureError, chiSweepFigure, disorderFigure, dosFigure, eeDosFigure,
  eeScatterFigure, sizeSweepFigure,
} from "./figures.js";
import { schemaFilename } from "./schemas.js";
import { DEFAULT_STYLE, Style } from "./svg.js";

export const FIGURE_KINDS = [
  "size-sweep", "chi-sweep", "dos", "disorder-scan", "ee-scatter", "ee-dos",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  inputs: Record<string, string>; // logical input name -> CSV path
  output: string;
  style?: Partial<Style>;
}

interface InputDecl {
  name: string;
  schema: string;
  required: boolean;
}

const KIND_INPUTS: Record<FigureKind, InputDecl[]> = {
  "dos": [
    { name: "histogram", schema: "dos_histogram", required: true },
    { name: "fits", schema: "fits", required: false },
  ],
  "ee-dos": [
    { name: "histogram", schema: "ee_histogram", required: true },
    { name: "fits", schema: "fits", required: false },
  ],
  "ee-scatter": [
    { name: "points", schema: "ee_scatter", required: true },
    { name: "fits", schema: "fits", required: false },
  ],
  "size-sweep": [{ name: "sweep", schema: "sweep_aggregate", required: true }],
  "chi-sweep": [{ name: "sweep", schema: "sweep_aggregate", required: true }],
  "disorder-scan": [{ name: "scan", schema: "disorder_aggregate", required: true }],
};

const KIND_TITLES: Record<FigureKind, string> = {
  "dos": "Density of states",
  "ee-dos": "Entanglement entropy distribution",
  "ee-scatter": "Entanglement entropy vs energy",
  "size-sweep": "System-size sweep",
  "chi-sweep": "Bond-dimension sweep",
  "disorder-scan": "Disorder scan",
};

export class SpecError extends Error {}

export function isFigureKind(s: string): s is FigureKind {
  return (FIGURE_KINDS as readonly string[]).includes(s);
}

function loadInputs(spec: FigureSpec): Record<string, Row[]> {
  const decls = KIND_INPUTS[spec.kind];
  if (!decls) throw new SpecError(`unknown figure kind: ${spec.kind}`);
  const known = new Set(decls.map((d) => d.name));
  for (const name of Object.keys(spec.inputs)) {
    if (!known.has(name)) {
      throw new SpecError(`figure kind ${spec.kind} takes no input named ${name}`);
    }
  }
  const data: Record<string, Row[]> = {};
  for (const decl of decls) {
    const path = spec.inputs[decl.name];
    if (path === undefined) {
      if (decl.required) {
        throw new SpecError(`figure kind ${spec.kind} requires input ${decl.name}`);
      }
      continue;
    }
    data[decl.name] = readCsv(path, decl.schema);
  }
  return data;
}

export function renderToString(spec: FigureSpec): string {
  const data = loadInputs(spec);
  const style: Style = {
    ...DEFAULT_STYLE,
    title: KIND_TITLES[spec.kind],
    ...spec.style,
  };
  switch (spec.kind) {
    case "dos":
      return dosFigure(data.histogram, data.fits ?? [], style);
    case "ee-dos":
      return eeDosFigure(data.histogram, data.fits ?? [], style);
    case "ee-scatter":
      return eeScatterFigure(data.points, data.fits ?? null, style);
    case "size-sweep":
      return sizeSweepFigure(data.sweep, style);
    case "chi-sweep":
      return chiSweepFigure(data.sweep, style);
    case "disorder-scan":
      return disorderFigure(data.scan, style);
  }
}

export function render(spec: FigureSpec): string {
  const svg = renderToString(spec);
  const dir = dirname(spec.output);
  if (dir && dir !== ".") mkdirSync(dir, { recursive: true });
  writeFileSync(spec.output, svg, "utf8");
  return spec.output;
}

export function specForRunDir(kind: FigureKind, runDir: string,
                              output?: string,
                              style?: Partial<Style>): FigureSpec {
  // default file layout of a run directory; optional inputs join only
  // when the file is actually there
  const inputs: Record<string, string> = {};
  for (const decl of KIND_INPUTS[kind]) {
    const path = join(runDir, schemaFilename(decl.schema));
    if (decl.required || existsSync(path)) inputs[decl.name] = path;
  }
  return {
    kind,
    inputs,
    output: output ?? join(runDir, `${kind}.svg`),
    style,
  };
}

export { FigureError };
export type { Row, Style };
