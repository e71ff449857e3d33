"""Canonical JSON reports and CSV trace files."""

from __future__ import annotations

import csv
import datetime as _dt
import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .sampling import fmt17


def to_jsonable(obj: Any) -> Any:
    """Plain JSON types only: non-finite floats become null, fractions become floats."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, enum.Enum):
        return to_jsonable(obj.value)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating, Fraction)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


@dataclass
class Trace:
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": to_jsonable(self.rows)}

    def to_csv(self, path: Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.columns)
            for row in self.rows:
                w.writerow([str(int(row[0])), *[fmt17(v) if v is not None else "nan" for v in row[1:]]])


@dataclass
class Report:
    command: str
    inputs: dict
    results: dict
    seed: int
    version: str
    traces: dict[str, Trace] = field(default_factory=dict)
    ok: bool = True
    error: str | None = None
    timestamp: str | None = None

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "inputs": to_jsonable(self.inputs),
            "results": to_jsonable(self.results),
            "traces": {k: t.to_dict() for k, t in self.traces.items()},
            "version": self.version,
            "seed": int(self.seed),
            "ok": bool(self.ok),
        }
        if self.error is not None:
            out["error"] = self.error
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def stamp(self) -> None:
        self.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")

    def write_traces(self, directory: str | Path) -> list[Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, tr in sorted(self.traces.items()):
            p = d / f"{name}.csv"
            tr.to_csv(p)
            paths.append(p)
        return paths


@lru_cache(maxsize=1)
def report_schema() -> dict:
    text = resources.files("metricjet").joinpath("schema/report.schema.json").read_text()
    return json.loads(text)


def validate_report(doc: dict) -> None:
    """Raises jsonschema.ValidationError when ``doc`` does not match the shipped schema."""
    jsonschema.validate(doc, report_schema())
