// Byte-for-byte visual regression against stored reference images.
// Regenerate the references with the commands in fixtures/generate.py when a
// rendering change is intentional.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { renderToString, specForRunDir } from "../src/plotkit.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));

describe("stored-reference visual regression", () => {
  it("dos matches the committed reference", () => {
    const svg = renderToString(specForRunDir("dos", join(FIXTURES, "run_n8")));
    const reference = readFileSync(join(FIXTURES, "reference", "dos.svg"), "utf8");
    expect(svg).toBe(reference);
  });

  it("ee-scatter matches the committed reference", () => {
    const svg = renderToString(
      specForRunDir("ee-scatter", join(FIXTURES, "run_n8")));
    const reference = readFileSync(
      join(FIXTURES, "reference", "ee-scatter.svg"), "utf8");
    expect(svg).toBe(reference);
  });
});
