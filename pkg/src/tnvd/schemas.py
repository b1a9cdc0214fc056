"""CSV artifact schemas: column contracts, typed writers, validators.

Every CSV a run directory contains is declared here once.  Writers format
values so that a read-back round-trips exactly (ints as decimal, floats via
repr).  Validators fail with the offending column and row number so a bad
artifact is diagnosable without opening the file.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # int | float | str, trailing "?" marks nullable (empty cell)

    @property
    def base(self) -> str:
        return self.kind.rstrip("?")

    @property
    def nullable(self) -> bool:
        return self.kind.endswith("?")


@dataclass(frozen=True)
class CSVSchema:
    name: str
    columns: tuple

    @property
    def header(self):
        return [c.name for c in self.columns]


def _schema(name, *cols) -> CSVSchema:
    return CSVSchema(name, tuple(Column(n, k) for n, k in cols))


SCHEMAS = {
    s.name: s for s in (
        _schema("training_log",
                ("step", "int"), ("F", "float"), ("term_hh", "float"),
                ("term_tt", "float"), ("term_cross", "float"),
                ("discarded_weight", "float")),
        _schema("spectrum",
                ("level", "int"), ("energy", "float")),
        _schema("spectrum_comparison",
                ("level", "int"), ("energy_ed", "float"),
                ("energy_tnvd", "float"), ("abs_error", "float")),
        _schema("dos_histogram",
                ("bin_left", "float"), ("bin_right", "float"),
                ("count", "float"), ("count_normalized", "float")),
        _schema("fits",
                ("model", "str"), ("parameter", "str"), ("value", "float")),
        _schema("ee_scatter",
                ("sample", "int"), ("bits", "str"), ("energy", "float"),
                ("energy_normalized", "float"), ("entropy_bits", "float")),
        _schema("ee_histogram",
                ("bin_left", "float"), ("bin_right", "float"),
                ("count", "float"), ("count_normalized", "float")),
        _schema("sweep_aggregate",
                ("axis", "str"), ("value", "float"), ("run_dir", "str"),
                ("F", "float?"), ("epsilon", "float?"), ("sigma", "float?"),
                ("omega", "float?"), ("status", "str"), ("message", "str")),
        _schema("disorder_aggregate",
                ("realization", "int"), ("seed", "int"), ("run_dir", "str"),
                ("F", "float?"), ("epsilon", "float?"), ("r", "float?"),
                ("dS_ground", "float?"), ("dS_zero", "float?"),
                ("status", "str"), ("message", "str")),
    )
}

# canonical artifact filename for each schema
FILENAMES = {name: f"{name}.csv" for name in SCHEMAS}


def _format_cell(col: Column, value) -> str:
    if value is None:
        if not col.nullable:
            raise SchemaError(f"column {col.name}: null not allowed")
        return ""
    if col.base == "int":
        return str(int(value))
    if col.base == "float":
        return repr(float(value))
    return str(value)


def write_csv(path, schema_name: str, rows) -> None:
    """Write rows (sequences in column order) under the named schema."""
    schema = SCHEMAS[schema_name]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(schema.header)
        for row in rows:
            if len(row) != len(schema.columns):
                raise SchemaError(
                    f"{schema_name}: row has {len(row)} cells, "
                    f"expected {len(schema.columns)}")
            writer.writerow([_format_cell(c, v)
                             for c, v in zip(schema.columns, row)])


def _check_cell(col: Column, text: str, where: str):
    if text == "" and col.base != "str":  # empty is a legal str value
        if col.nullable:
            return None
        raise SchemaError(f"{where}: column {col.name}: empty cell not allowed")
    try:
        if col.base == "int":
            return int(text)
        if col.base == "float":
            val = float(text)
            if math.isnan(val):
                raise ValueError("NaN")
            return val
    except ValueError as exc:
        raise SchemaError(
            f"{where}: column {col.name}: bad {col.base} {text!r}") from exc
    return text


def validate_csv(path, schema_name: str):
    """Check header and cell types; returns parsed rows as tuples."""
    schema = SCHEMAS[schema_name]
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file, no header") from None
            if header != schema.header:
                raise SchemaError(
                    f"{path}: header {header} != schema {schema.header}")
            rows = []
            for i, row in enumerate(reader, start=2):
                if len(row) != len(schema.columns):
                    raise SchemaError(
                        f"{path}: line {i}: {len(row)} cells, "
                        f"expected {len(schema.columns)}")
                rows.append(tuple(
                    _check_cell(c, cell, f"{path}: line {i}")
                    for c, cell in zip(schema.columns, row)))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    return rows


def read_csv(path, schema_name: str):
    """Validated read; rows come back as dicts keyed by column name."""
    schema = SCHEMAS[schema_name]
    return [dict(zip(schema.header, row))
            for row in validate_csv(path, schema_name)]


# ---------------------------------------------------------------------------
# summary.json
# ---------------------------------------------------------------------------

SUMMARY_FILENAME = "summary.json"

# keys whose values depend on the clock, not the computation
NONDETERMINISTIC_SUMMARY_KEYS = ("timing",)


def write_summary(path, summary: dict) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_summary(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def deterministic_summary(summary: dict) -> dict:
    """Strip clock-dependent sections before a bitwise comparison."""
    return {k: v for k, v in summary.items()
            if k not in NONDETERMINISTIC_SUMMARY_KEYS}
