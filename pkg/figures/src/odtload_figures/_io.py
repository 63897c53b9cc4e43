"""CSV loading with strict schema checks for the simulator outputs."""

from __future__ import annotations

import csv
import io


class SchemaError(ValueError):
    """Input CSV does not match the expected column schema."""


def strip_comments(text: str) -> str:
    return "\n".join(line for line in text.splitlines()
                     if not line.startswith("#"))


def read_rows(path: str, required: tuple[str, ...]) -> list[dict]:
    """Rows of a headered CSV as dicts; aborts naming any missing column."""
    with open(path, encoding="utf-8") as fh:
        body = strip_comments(fh.read())
    reader = csv.DictReader(io.StringIO(body))
    if reader.fieldnames is None:
        raise SchemaError(f"{path}: no header row")
    for col in required:
        if col not in reader.fieldnames:
            raise SchemaError(f"{path}: missing column {col!r}")
    return list(reader)


def parse_float(row: dict, col: str):
    value = row[col].strip() if row[col] is not None else ""
    return float(value) if value else None
