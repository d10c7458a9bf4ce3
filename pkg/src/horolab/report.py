"""Reports and their JSON/CSV serialisation."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__


def to_jsonable(obj):
    """Recursively convert numpy values, dataclasses and tuples to JSON types.

    Non-finite floats become the strings ``"nan"``, ``"inf"`` and ``"-inf"``.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if not f.name.startswith("_") and f.repr}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if obj is None or isinstance(obj, str):
        return obj
    return repr(obj)


@dataclass
class Table:
    columns: list
    rows: list

    @classmethod
    def from_array(cls, columns, array):
        arr = np.atleast_2d(np.asarray(array, dtype=float))
        return cls(list(columns), arr.tolist())


@dataclass
class Residual:
    name: str
    value: float
    tolerance: float
    passed: bool


@dataclass
class Report:
    experiment: str
    inputs: dict
    results: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    residuals: list = field(default_factory=list)
    citation: str = ""
    wall_clock: float = 0.0
    version: str = __version__
    status: str = "ok"
    error: str | None = None

    def residual(self, name, value, tolerance, passed=None):
        value = float(value)
        ok = (abs(value) < tolerance) if passed is None else bool(passed)
        self.residuals.append(Residual(name, value, float(tolerance), ok))
        return ok

    @property
    def passed(self):
        return all(bool(v) for v in self.verdicts.values()) and all(r.passed for r in self.residuals)

    def to_dict(self):
        d = to_jsonable(self)
        d["passed"] = self.passed
        return d


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, table):
    """Write a :class:`Table`; floats use ``repr`` so the text round-trips exactly."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_fmt(v) for v in row])


def write_report(report, out_dir, fmt="json", stem=None):
    """Write ``report`` to ``out_dir``; returns the written paths.

    ``json`` writes one document.  ``csv`` writes one file per table plus
    a ``<stem>_summary.csv`` of residuals and verdicts.
    """
    os.makedirs(out_dir, exist_ok=True)
    stem = stem or report.experiment
    paths = []
    if fmt == "json":
        path = os.path.join(out_dir, f"{stem}.json")
        with open(path, "w") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        paths.append(path)
    elif fmt == "csv":
        for name, table in report.tables.items():
            path = os.path.join(out_dir, f"{stem}_{name}.csv")
            write_csv(path, table)
            paths.append(path)
        rows = [[r.name, r.value, r.tolerance, r.passed] for r in report.residuals]
        rows += [[k, "", "", bool(v)] for k, v in report.verdicts.items()]
        path = os.path.join(out_dir, f"{stem}_summary.csv")
        write_csv(path, Table(["name", "value", "tolerance", "passed"], rows))
        paths.append(path)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return paths
