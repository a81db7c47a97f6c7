"""Structured experiment output."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SCHEMA_VERSION = 1


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    """Values, parameters and pass/fail checks of one experiment."""

    name: str
    params: dict[str, Any] = field(default_factory=dict)
    values: dict[str, Any] = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    rows: list[dict[str, Any]] = field(default_factory=list)
    csv_text: str | None = None  # preformatted CSV replacing the generic layout

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "experiment": self.name,
            "params": _plain(self.params),
            "values": _plain(self.values),
            "checks": [_plain(c.__dict__) for c in self.checks],
            "rows": [_plain(r) for r in self.rows],
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"

    def to_csv(self) -> str:
        """Tabular rows if the experiment produced any, else key/value pairs."""
        if self.csv_text is not None:
            return self.csv_text
        buf = io.StringIO()
        if self.rows:
            keys = list(dict.fromkeys(k for row in self.rows for k in row))
            writer = csv.DictWriter(buf, fieldnames=keys, restval="", lineterminator="\n")
            writer.writeheader()
            for row in self.rows:
                writer.writerow(_plain(row))
            return buf.getvalue()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        for section in ("params", "values"):
            for k, v in _flatten(_plain(getattr(self, section)), section):
                writer.writerow([k, v])
        for c in self.checks:
            writer.writerow([f"check.{c.name}", "pass" if c.passed else "FAIL"])
        return buf.getvalue()


def _flatten(obj, prefix):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}")
    elif isinstance(obj, list) and len(obj) > 0 and not isinstance(obj[0], (dict, list)):
        yield prefix, " ".join(str(x) for x in obj)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}.{i}")
    else:
        yield prefix, obj


def _plain(obj):
    """Convert numpy scalars/arrays and complex numbers into JSON-able values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_plain(float(obj.real)), _plain(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    return obj
