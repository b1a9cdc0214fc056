#!/usr/bin/env node
// plotkit CLI: pick a figure kind, point it at a run directory (or at
// individual CSVs), get an SVG. Exit 2 = bad invocation, 1 = bad inputs.

import { parseArgs } from "node:util";
import { pathToFileURL } from "node:url";
import { CsvError } from "./csv.js";
import {
  FIGURE_KINDS, FigureError, FigureSpec, SpecError, isFigureKind, render,
  specForRunDir,
} from "./plotkit.js";
import { Style } from "./svg.js";

const USAGE = `usage: plotkit --kind <kind> (--run-dir <dir> | --input <name>=<path> ...)
               [--out <path>] [--title <text>] [--width <px>] [--height <px>]

kinds: ${FIGURE_KINDS.join(", ")}

Renders one SVG figure from run-directory CSVs. With --run-dir the standard
filenames for the kind are assumed; --input supplies or overrides individual
files. Identical inputs and style always produce identical bytes.`;

type Writer = (line: string) => void;

const OPTIONS = {
  "kind": { type: "string" },
  "run-dir": { type: "string" },
  "input": { type: "string", multiple: true },
  "out": { type: "string" },
  "title": { type: "string" },
  "width": { type: "string" },
  "height": { type: "string" },
  "help": { type: "boolean", short: "h" },
} as const;

function parseSize(text: string, flag: string, err: Writer): number | null {
  const v = Number(text);
  if (!Number.isFinite(v) || v <= 0) {
    err(`${flag} must be a positive number, got: ${text}`);
    return null;
  }
  return v;
}

export function runCli(argv: string[],
                       out: Writer = (s) => process.stdout.write(s + "\n"),
                       err: Writer = (s) => process.stderr.write(s + "\n")): number {
  let values;
  try {
    values = parseArgs({ args: argv, options: OPTIONS, allowPositionals: false }).values;
  } catch (e) {
    err((e as Error).message);
    err(USAGE);
    return 2;
  }
  if (values.help) {
    out(USAGE);
    return 0;
  }
  if (!values.kind) {
    err("missing --kind");
    err(USAGE);
    return 2;
  }
  if (!isFigureKind(values.kind)) {
    err(`unknown figure kind: ${values.kind} (expected one of: ${FIGURE_KINDS.join(", ")})`);
    return 2;
  }
  const kind = values.kind;

  const style: Partial<Style> = {};
  if (values.title !== undefined) style.title = values.title;
  if (values.width !== undefined) {
    const w = parseSize(values.width, "--width", err);
    if (w === null) return 2;
    style.width = w;
  }
  if (values.height !== undefined) {
    const h = parseSize(values.height, "--height", err);
    if (h === null) return 2;
    style.height = h;
  }

  let spec: FigureSpec;
  if (values["run-dir"] !== undefined) {
    spec = specForRunDir(kind, values["run-dir"], values.out, style);
  } else {
    spec = { kind, inputs: {}, output: values.out ?? `${kind}.svg`, style };
  }
  for (const pair of values.input ?? []) {
    const at = pair.indexOf("=");
    if (at <= 0) {
      err(`bad --input (want <name>=<path>): ${pair}`);
      return 2;
    }
    spec.inputs[pair.slice(0, at)] = pair.slice(at + 1);
  }

  try {
    out(`wrote ${render(spec)}`);
    return 0;
  } catch (e) {
    if (e instanceof SpecError) {
      err(e.message);
      return 2;
    }
    if (e instanceof CsvError || e instanceof FigureError) {
      err(e.message);
      return 1;
    }
    err(`plotkit: ${(e as Error).message}`);
    return 1;
  }
}

if (process.argv[1] !== undefined &&
    import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exitCode = runCli(process.argv.slice(2));
}
