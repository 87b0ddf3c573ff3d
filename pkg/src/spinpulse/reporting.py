"""Delimited report files with reproducible headers.

Reports carry a comment header ('# key = value', sorted, no timestamps)
followed by the column row and data rows, so rerunning the recorded
command on the recorded configuration reproduces the file byte for byte.
Floats print with 17 significant digits in CSV; JSON Lines output keeps
native JSON numbers.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

__all__ = ["Report", "build_header", "write_report"]


@dataclass
class Report:
    """Column-ordered rows plus the header that reproduces them."""

    columns: list
    rows: list = field(default_factory=list)
    header: list = field(default_factory=list)

    def add_row(self, **cells) -> None:
        unknown = set(cells) - set(self.columns)
        if unknown:
            raise ValueError(f"row cells {sorted(unknown)} not in columns")
        self.rows.append(cells)


def build_header(version: str, command: str, config_items: list) -> list:
    """Header pairs: package version, invoked command, resolved config."""
    return [("version", version), ("command", command)] + list(config_items)


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def _json_cell(value):
    if isinstance(value, float):
        return value
    return value


def _write_csv(report: Report, stream) -> None:
    for key, value in report.header:
        stream.write(f"# {key} = {value}\n")
    stream.write(",".join(report.columns) + "\n")
    for row in report.rows:
        stream.write(
            ",".join(_format_cell(row.get(column)) for column in report.columns) + "\n"
        )


def _write_jsonl(report: Report, stream) -> None:
    stream.write(json.dumps({"header": dict(report.header)}) + "\n")
    for row in report.rows:
        record = {column: _json_cell(row.get(column)) for column in report.columns}
        stream.write(json.dumps(record) + "\n")


def write_report(report: Report, path: Optional[str], fmt: str = "csv") -> None:
    """Write ``report`` to ``path`` (or stdout when None) as csv or jsonl."""
    if fmt not in ("csv", "jsonl"):
        raise ValueError(f"unknown report format {fmt!r}")
    writer = _write_csv if fmt == "csv" else _write_jsonl
    if path is None:
        writer(report, sys.stdout)
        return
    parent = Path(path).parent
    if parent and not parent.exists():
        parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer(report, handle)
