"""Report rows and their CSV/JSON serialisation.

Serialisation is byte-stable: keys are sorted, floats use Python's
shortest round-trip repr, and wall-clock runtime is left out unless asked
for, so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

PROVENANCES = ("formula", "monte-carlo", "enumeration", "quadrature", "search")


@dataclass
class Row:
    name: str
    value: object
    units: str = ""
    provenance: str = "formula"
    expected: str = ""
    passed: bool | None = None
    note: str = ""

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")


@dataclass
class Report:
    title: str
    config: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    runtime: float | None = None

    def add(self, *args, **kwargs) -> Row:
        row = Row(*args, **kwargs)
        self.rows.append(row)
        return row

    @property
    def passed(self) -> bool:
        return all(r.passed is not False for r in self.rows)

    @property
    def failures(self) -> list:
        return [r for r in self.rows if r.passed is False]

    def to_dict(self, include_runtime: bool = False) -> dict:
        out = {
            "title": self.title,
            "config": self.config,
            "rows": [asdict(r) for r in self.rows],
            "passed": self.passed,
        }
        if include_runtime:
            out["runtime"] = self.runtime
        return out

    def to_json(self, include_runtime: bool = False) -> str:
        return json.dumps(_clean(self.to_dict(include_runtime)), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value", "units", "provenance", "expected", "passed", "note"])
        for r in self.rows:
            w.writerow([r.name, _fmt(r.value), r.units, r.provenance, r.expected,
                        "" if r.passed is None else ("pass" if r.passed else "FAIL"), r.note])
        return buf.getvalue()

    def render(self, fmt: str = "json", include_runtime: bool = False) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json(include_runtime)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list, tuple)):
        return json.dumps(_clean(v), sort_keys=True, separators=(",", ":"))
    return v


def _clean(obj):
    # JSON has no NaN/inf; emit them as strings
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj
