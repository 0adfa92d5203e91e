"""
Report tables and their CSV/JSON emission.

Output is byte-stable for a given configuration: floats are written with 17 significant
digits in CSV and as shortest round-trip reprs in JSON, keys are sorted, lines end in LF and
wall-clock timings are kept out of the tables.
"""

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

CSV_DIGITS = 17


@dataclass
class Table:
    name: str
    columns: List[str]
    rows: List[List[Any]] = field(default_factory=list)

    @staticmethod
    def from_records(name: str, records: Sequence[dict], columns: Sequence[str] = ()) -> "Table":
        """Build a table from dicts sharing the same keys; column order follows the first record."""
        columns = list(columns) or (list(records[0].keys()) if records else [])
        return Table(name=name, columns=columns, rows=[[record[c] for c in columns] for record in records])

    def add_row(self, *values: Any):
        if len(values) != len(self.columns):
            raise ValueError(f"Table {self.name} expects {len(self.columns)} values, got {len(values)}")
        self.rows.append(list(values))

    def column(self, name: str) -> List[Any]:
        index = self.columns.index(name)
        return [row[index] for row in self.rows]

    def to_dict(self) -> dict:
        rows = [[_json_value(value) for value in row] for row in self.rows]
        return {"name": self.name, "columns": list(self.columns), "rows": rows}

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_csv_value(value) for value in row])
        return buffer.getvalue()


@dataclass
class Report:
    command: str
    version: str
    config: dict
    tables: List[Table] = field(default_factory=list)
    flags: List[str] = field(default_factory=list)
    timing: Dict[str, float] = field(default_factory=dict)

    def add_table(self, table: Table) -> Table:
        self.tables.append(table)
        return table

    def table(self, name: str) -> Table:
        for table in self.tables:
            if table.name == name:
                return table
        raise KeyError(name)

    def to_dict(self, include_timing: bool = False) -> dict:
        data = {
            "meta": {"tool": "robin-gap", "version": self.version, "command": self.command},
            "config": _json_value(self.config),
            "tables": [table.to_dict() for table in self.tables],
            "flags": list(self.flags),
        }
        if include_timing:
            data["timing"] = {name: round(seconds, 3) for name, seconds in sorted(self.timing.items())}
        return data

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def write(self, output_dir: str) -> List[str]:
        """
        Write <command>.json, one <command>_<table>.csv per table and <command>.timing.json.

        Returns:
            The paths written
        """
        paths = [os.path.join(output_dir, f"{self.command}.json")]
        write_text(paths[0], self.to_json())
        for table in self.tables:
            path = os.path.join(output_dir, f"{self.command}_{table.name}.csv")
            write_text(path, table.to_csv())
            paths.append(path)
        if self.timing:
            path = os.path.join(output_dir, f"{self.command}.timing.json")
            write_text(path, json.dumps({"timing": self.to_dict(True)["timing"]}, indent=2, sort_keys=True) + "\n")
            paths.append(path)
        return paths


def write_text(path: str, text: str):
    """Write UTF-8 text with LF line endings atomically."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    # Write atomically: write to a temp file then rename it
    temp_path = path + ".tmp"
    with open(temp_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    os.replace(temp_path, path)


def _csv_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{CSV_DIGITS}g")
    return "" if value is None else str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _json_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_value(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no infinities
        return value if math.isfinite(value) else str(value)
    return value
