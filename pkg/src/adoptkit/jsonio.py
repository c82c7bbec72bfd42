"""Deterministic JSON/CSV serialization and the CSV series loader.

JSON output is canonical: keys sorted, floats rounded to at most 10
significant digits then rendered by the shortest round-trip repr, non-finite
values mapped to null. Matrices serialize row-major with explicit dimensions.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import NonMonotoneTime, ParseError, ValidationError
from .estimate import TimeSeries

FLOAT_SIG_DIGITS = 10


def _round_float(x: float):
    if not math.isfinite(x):
        return None
    if x == 0.0:
        return 0.0
    return float(f"{x:.{FLOAT_SIG_DIGITS}g}")


def canonicalize(obj):
    """Recursively convert to JSON-safe primitives with capped float precision."""
    if obj is None or isinstance(obj, (bool, str, int)):
        return obj
    if isinstance(obj, (float, np.floating)):
        return _round_float(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        if obj.ndim == 2:
            r, c = obj.shape
            return {
                "rows": r,
                "cols": c,
                "data": [canonicalize(float(v)) for v in obj.ravel(order="C")],
            }
        return [canonicalize(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: canonicalize(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): canonicalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonicalize(v) for v in obj]
    raise ValidationError(f"cannot serialize object of type {type(obj)!r}")


def dumps_canonical(obj) -> str:
    return json.dumps(canonicalize(obj), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def load_csv(path, t_col: str = "t", y_col: str = "y", dow_col: str | None = None) -> TimeSeries:
    """Load a TimeSeries from a headered, decimal-point, UTF-8 CSV file."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    times: list[float] = []
    values: list[float] = []
    dows: list[int] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("empty file, header row required")
        for col in [t_col, y_col] + ([dow_col] if dow_col else []):
            if col not in reader.fieldnames:
                raise ParseError(f"missing column {col!r} in header {reader.fieldnames}")
        for i, row in enumerate(reader, start=2):
            try:
                times.append(float(row[t_col]))
            except (TypeError, ValueError):
                raise ParseError(f"invalid value {row.get(t_col)!r}", row=i, column=t_col) from None
            try:
                values.append(float(row[y_col]))
            except (TypeError, ValueError):
                raise ParseError(f"invalid value {row.get(y_col)!r}", row=i, column=y_col) from None
            if dow_col:
                try:
                    dows.append(int(row[dow_col]))
                except (TypeError, ValueError):
                    raise ParseError(
                        f"invalid value {row.get(dow_col)!r}", row=i, column=dow_col
                    ) from None
    if len(times) == 0:
        raise ParseError("no data rows")
    t = np.asarray(times)
    if np.any(np.diff(t) <= 0):
        raise NonMonotoneTime("time column must be strictly increasing")
    return TimeSeries(t, np.asarray(values), dow=np.asarray(dows) if dow_col else None)


def save_csv(series: TimeSeries, path, t_col: str = "t", y_col: str = "y") -> None:
    """Write a TimeSeries as CSV; round-trips through load_csv byte-stably."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = [t_col, y_col] + (["dow"] if series.dow is not None else [])
        writer.writerow(header)
        for i in range(len(series)):
            row = [repr(float(series.times[i])), repr(float(series.values[i]))]
            if series.dow is not None:
                row.append(str(int(series.dow[i])))
            writer.writerow(row)


def load_task_economy(path, c_time: float = 1.0, c_fric: float = 1.0):
    """Load a TaskEconomy from a CSV with columns v, c_f, tau, phi, w."""
    from .econ import Task, TaskEconomy

    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    tasks = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError("empty file, header row required")
        for col in ("v", "c_f", "tau", "phi", "w"):
            if col not in reader.fieldnames:
                raise ParseError(f"missing column {col!r} in header {reader.fieldnames}")
        for i, row in enumerate(reader, start=2):
            try:
                tasks.append(
                    Task(
                        v=float(row["v"]),
                        c_f=float(row["c_f"]),
                        tau=float(row["tau"]),
                        phi=float(row["phi"]),
                        w=float(row["w"]),
                    )
                )
            except (TypeError, ValueError):
                raise ParseError("invalid task row", row=i) from None
    if not tasks:
        raise ParseError("no data rows")
    return TaskEconomy(tuple(tasks), c_time=c_time, c_fric=c_fric)


def save_tidy_curves(path, series: TimeSeries, fitted: dict[str, np.ndarray]) -> None:
    """Tidy (series, t, value) CSV for external plotting: observed plus fits."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["series", "t", "value"])
        for i in range(len(series)):
            writer.writerow(["observed", repr(float(series.times[i])), repr(float(series.values[i]))])
        for name in sorted(fitted):
            vals = fitted[name]
            for i in range(len(series)):
                writer.writerow([name, repr(float(series.times[i])), repr(float(vals[i]))])
