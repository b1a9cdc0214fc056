// Column layouts of the run-directory CSVs, mirrored from the producer.
// A trailing "?" on the kind marks a nullable column (empty cell -> null).

export type ColumnKind = "int" | "float" | "str";

export interface Column {
  name: string;
  kind: ColumnKind;
  nullable: boolean;
}

export interface CsvSchema {
  name: string;
  columns: Column[];
}

function col(name: string, spec: string): Column {
  const nullable = spec.endsWith("?");
  const kind = (nullable ? spec.slice(0, -1) : spec) as ColumnKind;
  return { name, kind, nullable };
}

function schema(name: string, ...cols: [string, string][]): CsvSchema {
  return { name, columns: cols.map(([n, k]) => col(n, k)) };
}

export const SCHEMAS: Record<string, CsvSchema> = Object.fromEntries(
  [
    schema("training_log",
      ["step", "int"], ["F", "float"], ["term_hh", "float"],
      ["term_tt", "float"], ["term_cross", "float"],
      ["discarded_weight", "float"]),
    schema("spectrum", ["level", "int"], ["energy", "float"]),
    schema("spectrum_comparison",
      ["level", "int"], ["energy_ed", "float"],
      ["energy_tnvd", "float"], ["abs_error", "float"]),
    schema("dos_histogram",
      ["bin_left", "float"], ["bin_right", "float"],
      ["count", "float"], ["count_normalized", "float"]),
    schema("fits", ["model", "str"], ["parameter", "str"], ["value", "float"]),
    schema("ee_scatter",
      ["sample", "int"], ["bits", "str"], ["energy", "float"],
      ["energy_normalized", "float"], ["entropy_bits", "float"]),
    schema("ee_histogram",
      ["bin_left", "float"], ["bin_right", "float"],
      ["count", "float"], ["count_normalized", "float"]),
    schema("sweep_aggregate",
      ["axis", "str"], ["value", "float"], ["run_dir", "str"],
      ["F", "float?"], ["epsilon", "float?"], ["sigma", "float?"],
      ["omega", "float?"], ["status", "str"], ["message", "str"]),
    schema("disorder_aggregate",
      ["realization", "int"], ["seed", "int"], ["run_dir", "str"],
      ["F", "float?"], ["epsilon", "float?"], ["r", "float?"],
      ["dS_ground", "float?"], ["dS_zero", "float?"],
      ["status", "str"], ["message", "str"]),
  ].map((s) => [s.name, s]),
);

// canonical artifact filename for each schema
export function schemaFilename(name: string): string {
  return `${name}.csv`;
}
