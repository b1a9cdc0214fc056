import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { CsvError, numbers, readCsv } from "../src/csv.js";
import { SCHEMAS } from "../src/schemas.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));

function scratch(name: string, text: string): string {
  const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
  const path = join(dir, name);
  writeFileSync(path, text);
  return path;
}

describe("readCsv", () => {
  it("loads a real fits.csv", () => {
    const rows = readCsv(join(FIXTURES, "run_n8", "fits.csv"), "fits");
    expect(rows.length).toBeGreaterThan(0);
    const models = new Set(rows.map((r) => r.model));
    expect(models.has("gaussian")).toBe(true);
    for (const row of rows) expect(typeof row.value).toBe("number");
  });

  it("loads every fixture CSV against its schema", () => {
    const cases: [string, string][] = [
      ["run_n8/training_log.csv", "training_log"],
      ["run_n8/spectrum.csv", "spectrum"],
      ["run_n8/spectrum_comparison.csv", "spectrum_comparison"],
      ["run_n8/dos_histogram.csv", "dos_histogram"],
      ["run_n8/ee_scatter.csv", "ee_scatter"],
      ["run_n8/ee_histogram.csv", "ee_histogram"],
      ["sweep_n/sweep_aggregate.csv", "sweep_aggregate"],
      ["disorder_n8/disorder_aggregate.csv", "disorder_aggregate"],
    ];
    for (const [rel, schema] of cases) {
      const rows = readCsv(join(FIXTURES, rel), schema);
      expect(rows.length).toBeGreaterThan(0);
    }
  });

  it("names the path when the file is missing", () => {
    expect(() => readCsv("/no/such/dir/fits.csv", "fits"))
      .toThrowError(/missing CSV: \/no\/such\/dir\/fits\.csv/);
  });

  it("rejects an unknown schema name", () => {
    expect(() => readCsv(join(FIXTURES, "run_n8", "fits.csv"), "nope"))
      .toThrowError(/unknown schema: nope/);
  });

  it("names the offending column on header mismatch", () => {
    const path = scratch("fits.csv", "model,param,value\r\na,b,1\r\n");
    expect(() => readCsv(path, "fits"))
      .toThrowError(/header mismatch at column parameter/);
  });

  it("names column and line for a bad cell", () => {
    const path = scratch("fits.csv",
      "model,parameter,value\r\ngaussian,sigma,oops\r\n");
    try {
      readCsv(path, "fits");
      expect.unreachable("should have thrown");
    } catch (e) {
      expect(e).toBeInstanceOf(CsvError);
      expect(String(e)).toMatch(/line 2/);
      expect(String(e)).toMatch(/column value/);
      expect(String(e)).toMatch(/not a number: oops/);
    }
  });

  it("rejects a non-integer in an int column", () => {
    const path = scratch("spectrum.csv", "level,energy\r\n1.5,-2.0\r\n");
    expect(() => readCsv(path, "spectrum"))
      .toThrowError(/column level: not an integer: 1\.5/);
  });

  it("accepts repr() infinity spellings in float columns", () => {
    const header = "step,F,term_hh,term_tt,term_cross,discarded_weight";
    const path = scratch("training_log.csv",
      `${header}\r\n0,-inf,1.0,1.0,1.0,0.0\r\n`);
    const rows = readCsv(path, "training_log");
    expect(rows[0].F).toBe(-Infinity);
  });

  it("rejects a short row", () => {
    const path = scratch("fits.csv", "model,parameter,value\r\ngaussian,A\r\n");
    expect(() => readCsv(path, "fits"))
      .toThrowError(/line 2: expected 3 cells, got 2/);
  });

  it("maps empty nullable cells to null and keeps empty required cells fatal", () => {
    const header = "axis,value,run_dir,F,epsilon,sigma,omega,status,message";
    const ok = scratch("sweep_aggregate.csv",
      `${header}\r\nN,4.0,N-4,,,,,ok,\r\n`);
    const rows = readCsv(ok, "sweep_aggregate");
    expect(rows[0].F).toBeNull();
    expect(rows[0].sigma).toBeNull();
    expect(rows[0].message).toBe("");

    const bad = scratch("sweep_aggregate.csv",
      `${header}\r\nN,,N-4,,,,,ok,\r\n`);
    expect(() => readCsv(bad, "sweep_aggregate"))
      .toThrowError(/column value: empty cell not allowed/);
  });

  it("rejects an empty file", () => {
    const path = scratch("fits.csv", "");
    expect(() => readCsv(path, "fits")).toThrowError(/empty file/);
  });
});

describe("numbers", () => {
  it("skips nulls and infinities, keeps order", () => {
    const rows = [{ a: 1 }, { a: null }, { a: -Infinity }, { a: 3 }] as any;
    expect(numbers(rows, "a")).toEqual([1, 3]);
  });
});

describe("SCHEMAS", () => {
  it("covers all nine artifact kinds", () => {
    expect(Object.keys(SCHEMAS).sort()).toEqual([
      "disorder_aggregate", "dos_histogram", "ee_histogram", "ee_scatter",
      "fits", "spectrum", "spectrum_comparison", "sweep_aggregate",
      "training_log",
    ]);
  });
});
