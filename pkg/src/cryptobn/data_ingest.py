"""Loading, aligning, transforming and summarising daily time series.

Missing cells are stored as ``NaN`` in float64 column arrays. Tables are
immutable: the column arrays are flagged read-only on construction.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    AllMissing,
    DuplicateColumnName,
    DuplicateDate,
    EmptyIntersection,
    NonPositiveValue,
    ParseError,
    TableError,
)

TRANSFORMS = ("raw", "first_difference", "log_return")


@dataclass(frozen=True)
class TimeSeriesTable:
    dates: tuple[date, ...]
    columns: Mapping[str, np.ndarray]

    def __post_init__(self):
        dates = tuple(self.dates)
        if len(dates) < 2:
            raise TableError("a table needs at least 2 rows")
        for prev, cur in zip(dates, dates[1:]):
            if cur <= prev:
                raise TableError(f"dates not strictly increasing at {cur}")
        cols = {}
        for name, values in self.columns.items():
            arr = np.array(values, dtype=float)
            if arr.shape != (len(dates),):
                raise TableError(
                    f"column {name!r} has {arr.size} entries, expected {len(dates)}"
                )
            arr.setflags(write=False)
            cols[name] = arr
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "columns", cols)

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.dates)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def select(self, names: Sequence[str]) -> "TimeSeriesTable":
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise KeyError(f"unknown columns: {missing}")
        return TimeSeriesTable(self.dates, {n: self.columns[n] for n in names})

    def take(self, rows: Sequence[int] | np.ndarray) -> "TimeSeriesTable":
        rows = np.asarray(rows)
        return TimeSeriesTable(
            tuple(self.dates[i] for i in rows),
            {n: v[rows] for n, v in self.columns.items()},
        )

    def to_csv(self, date_column: str = "date") -> str:
        """Canonical CSV: ascending dates, declared column order, empty = missing."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([date_column, *self.columns])
        for i, d in enumerate(self.dates):
            row = [d.isoformat()]
            for values in self.columns.values():
                v = values[i]
                row.append("" if np.isnan(v) else repr(float(v)))
            writer.writerow(row)
        return buf.getvalue()


@dataclass(frozen=True)
class TransformSpec:
    transforms: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name, kind in self.transforms.items():
            if kind not in TRANSFORMS:
                raise ValueError(f"unknown transform {kind!r} for column {name!r}")


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    std_dev: float
    min: float
    median: float
    max: float
    n_obs: int

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std_dev": self.std_dev,
            "min": self.min,
            "median": self.median,
            "max": self.max,
            "n_obs": self.n_obs,
        }


def load_csv(
    path: str | Path,
    date_column: str = "date",
    value_columns: Sequence[str] | None = None,
) -> TimeSeriesTable:
    """Read a comma-separated file with an ISO date column.

    Empty value fields become missing. Rows come back sorted by date.
    ``value_columns=None`` loads every non-date column. Raises
    ``FileNotFoundError``, ``ParseError`` (1-based data row and column name)
    or ``DuplicateDate``.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(0, date_column, "file is empty") from None
        if date_column not in header:
            raise ParseError(0, date_column, "column not in header")
        if value_columns is None:
            value_columns = [h for h in header if h != date_column]
        for name in value_columns:
            if name not in header:
                raise ParseError(0, name, "column not in header")
        date_idx = header.index(date_column)
        col_idx = [header.index(name) for name in value_columns]

        records: dict[date, list[float]] = {}
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                day = date.fromisoformat(row[date_idx].strip())
            except (ValueError, IndexError):
                raise ParseError(row_no, date_column, "expected YYYY-MM-DD") from None
            values = []
            for name, idx in zip(value_columns, col_idx):
                cell = row[idx].strip() if idx < len(row) else ""
                if cell == "":
                    values.append(math.nan)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(row_no, name, f"not a number: {cell!r}") from None
            if day in records:
                raise DuplicateDate(day)
            records[day] = values

    dates = sorted(records)
    matrix = np.array([records[d] for d in dates], dtype=float).reshape(
        len(dates), len(value_columns)
    )
    return TimeSeriesTable(
        tuple(dates), {name: matrix[:, j] for j, name in enumerate(value_columns)}
    )


def align(
    tables: Sequence[TimeSeriesTable],
    policy: str = "intersect",
    max_gap: int | None = None,
) -> TimeSeriesTable:
    """Merge tables onto one calendar.

    ``intersect`` keeps dates common to all tables. ``forward_fill`` keeps the
    union of dates; a date absent from a table takes that table's most recent
    prior value if it is at most ``max_gap`` days old, otherwise it is missing.
    """
    if not tables:
        raise ValueError("align needs at least one table")
    seen: set[str] = set()
    for t in tables:
        for name in t.columns:
            if name in seen:
                raise DuplicateColumnName(name)
            seen.add(name)

    if policy == "intersect":
        common = set(tables[0].dates)
        for t in tables[1:]:
            common &= set(t.dates)
        if len(common) == 0:
            raise EmptyIntersection("tables share no dates")
        dates = sorted(common)
        columns = {}
        for t in tables:
            pos = {d: i for i, d in enumerate(t.dates)}
            idx = np.array([pos[d] for d in dates])
            for name, values in t.columns.items():
                columns[name] = values[idx]
        if len(dates) < 2:
            raise EmptyIntersection("fewer than 2 common dates")
        return TimeSeriesTable(tuple(dates), columns)

    if policy == "forward_fill":
        if max_gap is None or max_gap < 0:
            raise ValueError("forward_fill needs max_gap >= 0 days")
        dates = sorted(set().union(*(t.dates for t in tables)))
        columns = {}
        for t in tables:
            own = {d: i for i, d in enumerate(t.dates)}
            for name, values in t.columns.items():
                columns[name] = _fill_column(dates, own, values, max_gap)
        return TimeSeriesTable(tuple(dates), columns)

    raise ValueError(f"unknown alignment policy {policy!r}")


def _fill_column(dates, own, values, max_gap):
    out = np.full(len(dates), math.nan)
    last_day = None
    last_value = math.nan
    for i, d in enumerate(dates):
        if d in own:
            out[i] = values[own[d]]
            last_day, last_value = d, values[own[d]]
        elif last_day is not None and (d - last_day).days <= max_gap:
            out[i] = last_value
    return out


def transform(table: TimeSeriesTable, spec: TransformSpec) -> TimeSeriesTable:
    """Apply per-column transforms; unlisted columns stay raw.

    Differencing drops the first row of the whole table so every column stays
    aligned. A change involving a missing value is itself missing.
    """
    for name in spec.transforms:
        if name not in table.columns:
            raise KeyError(f"transform names unknown column {name!r}")
    differenced = any(k != "raw" for k in spec.transforms.values())
    columns = {}
    for name, values in table.columns.items():
        kind = spec.transforms.get(name, "raw")
        if kind != "raw" and np.isnan(values[0]):
            raise ValueError(f"column {name!r}: first value must be present")
        if kind == "raw":
            columns[name] = values[1:] if differenced else values
        elif kind == "first_difference":
            columns[name] = values[1:] - values[:-1]
        else:
            present = values[~np.isnan(values)]
            if np.any(present <= 0):
                raise NonPositiveValue(f"column {name!r} has values <= 0")
            columns[name] = np.log(values[1:] / values[:-1])
    dates = table.dates[1:] if differenced else table.dates
    return TimeSeriesTable(dates, columns)


def describe(values: Iterable[float]) -> SummaryStats:
    """Mean, sample std (n-1), min, median, max of the non-missing values."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    arr = np.sort(arr[~np.isnan(arr)])
    if arr.size == 0:
        raise AllMissing("no non-missing values")
    n = arr.size
    # math.fsum keeps the mean independent of input order.
    mean = math.fsum(arr) / n
    std = math.sqrt(math.fsum((arr - mean) ** 2) / (n - 1)) if n > 1 else 0.0
    return SummaryStats(
        mean=mean,
        std_dev=std,
        min=float(arr[0]),
        median=float(np.median(arr)),
        max=float(arr[-1]),
        n_obs=int(n),
    )


def date_range(start: date, n: int, skip_weekends: bool = False) -> list[date]:
    """Consecutive calendar days (optionally trading days only) from ``start``."""
    out = []
    d = start
    while len(out) < n:
        if not (skip_weekends and d.weekday() >= 5):
            out.append(d)
        d += timedelta(days=1)
    return out
