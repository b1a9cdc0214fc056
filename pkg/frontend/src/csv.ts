// Schema-checked CSV loading. Every failure names the file, and where it
// applies the offending column and 1-based line, so a bad artifact is
// diagnosable without opening it.

import { existsSync, readFileSync } from "node:fs";
import Papa from "papaparse";
import { Column, CsvSchema, SCHEMAS } from "./schemas.js";

export class CsvError extends Error {}

export type Cell = number | string | null;
export type Row = Record<string, Cell>;

const INT_RE = /^[+-]?\d+$/;

// spellings Python's repr() uses that Number() does not accept
const FLOAT_WORDS: Record<string, number> = {
  "inf": Infinity, "+inf": Infinity, "-inf": -Infinity, "nan": NaN,
};

function parseCell(col: Column, text: string, where: string): Cell {
  if (text === "" && col.kind !== "str") {
    if (col.nullable) return null;
    throw new CsvError(`${where}: column ${col.name}: empty cell not allowed`);
  }
  if (col.kind === "int") {
    if (!INT_RE.test(text)) {
      throw new CsvError(`${where}: column ${col.name}: not an integer: ${text}`);
    }
    return Number(text);
  }
  if (col.kind === "float") {
    if (text in FLOAT_WORDS) return FLOAT_WORDS[text];
    const val = Number(text);
    if (text.trim() === "" || Number.isNaN(val)) {
      throw new CsvError(`${where}: column ${col.name}: not a number: ${text}`);
    }
    return val;
  }
  return text;
}

export function readCsv(path: string, schemaName: string): Row[] {
  const schema: CsvSchema | undefined = SCHEMAS[schemaName];
  if (!schema) throw new CsvError(`unknown schema: ${schemaName}`);
  if (!existsSync(path)) throw new CsvError(`missing CSV: ${path}`);

  const text = readFileSync(path, "utf8");
  if (text.trim() === "") throw new CsvError(`${path}: empty file`);
  const parsed = Papa.parse<string[]>(text, { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const e = parsed.errors[0];
    throw new CsvError(`${path}: malformed CSV: ${e.message}`);
  }
  const lines = parsed.data;
  if (lines.length === 0) throw new CsvError(`${path}: empty file`);

  const header = lines[0];
  const expected = schema.columns.map((c) => c.name);
  if (header.length !== expected.length ||
      header.some((h, i) => h !== expected[i])) {
    const at = expected.findIndex((name, i) => header[i] !== name);
    const bad = at >= 0 ? expected[at] : header[expected.length];
    throw new CsvError(
      `${path}: header mismatch at column ${bad}: ` +
      `expected [${expected.join(", ")}], got [${header.join(", ")}]`);
  }

  const rows: Row[] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i];
    const where = `${path} line ${i + 1}`;
    if (cells.length !== schema.columns.length) {
      throw new CsvError(
        `${where}: expected ${schema.columns.length} cells, got ${cells.length}`);
    }
    const row: Row = {};
    for (let k = 0; k < schema.columns.length; k++) {
      row[schema.columns[k].name] = parseCell(schema.columns[k], cells[k], where);
    }
    rows.push(row);
  }
  return rows;
}

export function numbers(rows: Row[], column: string): number[] {
  // finite values of one column, in row order; nulls and infinities have
  // no place on a linear axis
  const out: number[] = [];
  for (const row of rows) {
    const v = row[column];
    if (typeof v === "number" && Number.isFinite(v)) out.push(v);
  }
  return out;
}
