"""Tabulated sweep output shared by the link model, optimizer and CLI."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

__all__ = ["SweepResult", "format_number"]

SIG_DIGITS = 9


def format_number(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return format_number(x)
    return x


@dataclass
class SweepResult:
    """Rows of ``(independent variable, metric...)`` plus free-form metadata.

    Column names carry their unit as a suffix (``distance_m``,
    ``pathloss_db``).  A ``flag`` column, when present, is 1 for rows whose
    solve was near-singular or failed.
    """

    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def append(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(tuple(values))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def flagged(self) -> bool:
        return "flag" in self.columns and any(self.column("flag"))

    def to_csv(self) -> str:
        if not self.rows:
            raise ValueError("refusing to emit an empty sweep")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format_number(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        if not self.rows:
            raise ValueError("refusing to emit an empty sweep")
        doc = {
            "meta": self.meta,
            "columns": self.columns,
            "rows": [{c: _json_value(v) for c, v in zip(self.columns, r)} for r in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SweepResult":
        doc = json.loads(text)
        cols = doc["columns"]

        def back(v):
            if isinstance(v, str) and v in ("nan", "inf", "-inf"):
                return float(v)
            return v

        rows = [tuple(back(r[c]) for c in cols) for r in doc["rows"]]
        return cls(cols, rows, doc.get("meta", {}))
