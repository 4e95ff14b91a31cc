"""CSV and key-value file interchange.

Schemas:
    load CSV         header ``timestamp,load``, rows ``YYYY-MM-DDTHH:MM,value``
    temperature CSV  header ``timestamp,w1,...,w25``
    quantile CSV     header ``timestamp,q01,...,q99``
    params file      ``key=value`` lines
    weights file     ``tau,weight`` lines

Gaps of up to MAX_GAP_HOURS consecutive missing hours are repaired by linear
interpolation on ingestion; anything larger is an error.
"""
from __future__ import annotations

from datetime import datetime
from pathlib import Path

import numpy as np

from .errors import (
    EmptyFile,
    GapTooLarge,
    IoError,
    MalformedRow,
    WrongColumnCount,
)
from .series import HourlySeries, N_STATIONS, ONE_HOUR, StationTable

MAX_GAP_HOURS = 6

_TS_FORMATS = ("%Y-%m-%dT%H:%M", "%Y-%m-%dT%H:%M:%S")


def _parse_timestamp(text: str, lineno: int) -> datetime:
    for fmt in _TS_FORMATS:
        try:
            ts = datetime.strptime(text, fmt)
        except ValueError:
            continue
        if ts.minute or ts.second:
            raise MalformedRow(f"line {lineno}: timestamp {text!r} is not a whole hour")
        return ts
    raise MalformedRow(f"line {lineno}: bad timestamp {text!r}")


def _parse_value(text: str, lineno: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise MalformedRow(f"line {lineno}: bad number {text!r}") from None
    if not np.isfinite(v):
        raise MalformedRow(f"line {lineno}: non-finite value {text!r}")
    return v


def _read_rows(path, n_value_cols: int, header_first: str):
    """Shared CSV scanner: returns (timestamps, value-matrix)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    rows = [ln for ln in lines if ln.strip()]
    if not rows:
        raise EmptyFile(f"{path} has no rows")
    header = [c.strip().lower() for c in rows[0].split(",")]
    if header[0] != "timestamp":
        raise MalformedRow(f"{path}: first column of header must be 'timestamp'")
    if len(header) != 1 + n_value_cols:
        raise WrongColumnCount(
            f"{path}: expected {1 + n_value_cols} header columns, got {len(header)}"
        )
    if header_first and header[1] != header_first:
        raise MalformedRow(f"{path}: expected header column {header_first!r}")
    if len(rows) == 1:
        raise EmptyFile(f"{path} has a header but no data rows")

    stamps: list[datetime] = []
    values = np.empty((len(rows) - 1, n_value_cols), dtype=np.float64)
    for i, line in enumerate(rows[1:], start=2):
        cells = line.split(",")
        if len(cells) != 1 + n_value_cols:
            raise WrongColumnCount(f"line {i}: expected {1 + n_value_cols} columns, got {len(cells)}")
        ts = _parse_timestamp(cells[0].strip(), i)
        if stamps and ts <= stamps[-1]:
            raise MalformedRow(f"line {i}: timestamps not strictly ascending at {ts}")
        stamps.append(ts)
        for j in range(n_value_cols):
            values[i - 2, j] = _parse_value(cells[j + 1].strip(), i)
    return stamps, values


def _repair_gaps(stamps: list[datetime], values: np.ndarray) -> np.ndarray:
    """Fill missing hours by linear interpolation between bracketing rows."""
    start, end = stamps[0], stamps[-1]
    n_full = int((end - start).total_seconds()) // 3600 + 1
    full = np.empty((n_full, values.shape[1]), dtype=np.float64)
    full.fill(np.nan)
    prev_idx = None
    for ts, row in zip(stamps, values):
        idx = int((ts - start).total_seconds()) // 3600
        if prev_idx is not None:
            missing = idx - prev_idx - 1
            if missing > MAX_GAP_HOURS:
                raise GapTooLarge(
                    f"gap of {missing} hours before {ts} exceeds {MAX_GAP_HOURS}"
                )
            if missing > 0:
                frac = np.arange(1, missing + 1, dtype=np.float64)[:, None] / (missing + 1)
                full[prev_idx + 1 : idx] = full[prev_idx] + frac * (row - full[prev_idx])
        full[idx] = row
        prev_idx = idx
    return full


def ingest_load_csv(path) -> HourlySeries:
    """Read a load CSV, repairing gaps of up to 6 hours."""
    stamps, values = _read_rows(path, 1, "load")
    full = _repair_gaps(stamps, values)
    return HourlySeries(stamps[0], full[:, 0], unit="load")


def ingest_temperature_csv(path) -> StationTable:
    """Read a 25-station temperature CSV with the same gap policy per station."""
    stamps, values = _read_rows(path, N_STATIONS, "w1")
    full = _repair_gaps(stamps, values)
    return StationTable(stamps[0], full)


def _fmt(v: float) -> str:
    return repr(float(v))


def _open_out(path):
    parent = Path(path).parent
    if not parent.is_dir():
        raise IoError(f"output directory {parent} does not exist")
    try:
        return open(path, "w", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_load_csv(series: HourlySeries, path) -> None:
    with _open_out(path) as fh:
        fh.write("timestamp,load\n")
        ts = series.start
        for v in series.values:
            fh.write(f"{ts:%Y-%m-%dT%H:%M},{_fmt(v)}\n")
            ts += ONE_HOUR


def write_temperature_csv(table: StationTable, path) -> None:
    with _open_out(path) as fh:
        fh.write("timestamp," + ",".join(f"w{i}" for i in range(1, N_STATIONS + 1)) + "\n")
        ts = table.start
        for row in table.stations:
            fh.write(f"{ts:%Y-%m-%dT%H:%M}," + ",".join(_fmt(v) for v in row) + "\n")
            ts += ONE_HOUR


def write_params(mapping: dict, path) -> None:
    """Persist a flat mapping as key=value lines (lists comma-joined)."""
    with _open_out(path) as fh:
        for key, value in mapping.items():
            if isinstance(value, (list, tuple, np.ndarray)):
                text = ",".join(_fmt(v) for v in np.asarray(value).ravel())
            elif isinstance(value, float):
                text = _fmt(value)
            else:
                text = str(value)
            fh.write(f"{key}={text}\n")


def read_params(path) -> dict:
    """Inverse of write_params; numbers parsed, comma lists become float lists."""
    out: dict = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    for ln in lines:
        if not ln.strip() or ln.lstrip().startswith("#"):
            continue
        if "=" not in ln:
            raise MalformedRow(f"bad params line {ln!r}")
        key, _, raw = ln.partition("=")
        raw = raw.strip()
        if "," in raw:
            out[key.strip()] = [float(x) for x in raw.split(",")]
        else:
            try:
                out[key.strip()] = float(raw)
            except ValueError:
                out[key.strip()] = raw
    return out


def write_quantile_csv(forecast, path) -> None:
    """Write a QuantileForecast as timestamp,q01..q99 rows."""
    values = forecast.values
    with _open_out(path) as fh:
        fh.write("timestamp," + ",".join(f"q{i:02d}" for i in range(1, 100)) + "\n")
        ts = forecast.start
        for row in values:
            fh.write(f"{ts:%Y-%m-%dT%H:%M}," + ",".join(_fmt(v) for v in row) + "\n")
            ts += ONE_HOUR


def read_quantile_csv(path):
    """Read a timestamp,q01..q99 CSV back into a QuantileForecast."""
    from .quantreg import QuantileForecast

    stamps, values = _read_rows(path, 99, "q01")
    for ts, nxt in zip(stamps, stamps[1:]):
        if nxt - ts != ONE_HOUR:
            raise MalformedRow(f"quantile rows must be contiguous hours, gap before {nxt}")
    if np.any(np.diff(values, axis=1) < 0):
        raise MalformedRow(f"{path}: quantile rows are not nondecreasing")
    return QuantileForecast(stamps[0], values)
