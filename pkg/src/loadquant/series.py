"""Calendar-aware hourly time series containers.

All containers are immutable after construction and safe to share between
threads. Hour-of-day and period-of-week are 1-based.
"""
from __future__ import annotations

import calendar
from dataclasses import dataclass
from datetime import date, datetime, timedelta

import numpy as np

from .errors import IndexOutOfRange

ONE_HOUR = timedelta(hours=1)
HOURS_PER_WEEK = 168
N_STATIONS = 25


def _check_wall_clock(ts: datetime, what: str) -> None:
    if ts.tzinfo is not None:
        raise ValueError(f"{what} must be timezone-naive")
    if ts.minute or ts.second or ts.microsecond:
        raise ValueError(f"{what} must be aligned to a whole hour, got {ts!r}")


@dataclass(frozen=True)
class CalendarStamp:
    """Calendar decomposition of one hour.

    day_of_week follows ISO numbering (1 = Monday .. 7 = Sunday) and
    period_of_week = 24 * (day_of_week - 1) + hour_of_day.
    """

    day_of_week: int
    hour_of_day: int
    period_of_week: int
    day_of_year: int
    year_length: int

    def __post_init__(self) -> None:
        if not 1 <= self.day_of_week <= 7:
            raise ValueError(f"day_of_week out of range: {self.day_of_week}")
        if not 1 <= self.hour_of_day <= 24:
            raise ValueError(f"hour_of_day out of range: {self.hour_of_day}")
        if self.period_of_week != 24 * (self.day_of_week - 1) + self.hour_of_day:
            raise ValueError("period_of_week inconsistent with day/hour")
        if self.year_length not in (365, 366):
            raise ValueError(f"year_length must be 365 or 366: {self.year_length}")
        if not 1 <= self.day_of_year <= self.year_length:
            raise ValueError("day_of_year exceeds year_length")


def stamp_of(ts: datetime) -> CalendarStamp:
    """Calendar stamp for an arbitrary wall-clock hour."""
    _check_wall_clock(ts, "timestamp")
    dow = ts.isoweekday()
    hod = ts.hour + 1
    return CalendarStamp(
        day_of_week=dow,
        hour_of_day=hod,
        period_of_week=24 * (dow - 1) + hod,
        day_of_year=ts.timetuple().tm_yday,
        year_length=366 if calendar.isleap(ts.year) else 365,
    )


@dataclass(frozen=True)
class HourlySeries:
    """Contiguous hourly observations starting at `start`.

    `unit` tags the physical quantity ("load" or "temperature"). Values are
    stored as a read-only float64 array with no gaps.
    """

    start: datetime
    values: np.ndarray
    unit: str = "load"

    def __post_init__(self) -> None:
        _check_wall_clock(self.start, "series start")
        if self.unit not in ("load", "temperature"):
            raise ValueError(f"unknown unit tag: {self.unit!r}")
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError("values must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must all be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    @property
    def end(self) -> datetime:
        """Timestamp of the last observation."""
        return self.start + (len(self) - 1) * ONE_HOUR

    def timestamp(self, index: int) -> datetime:
        if not 0 <= index < len(self):
            raise IndexOutOfRange(f"index {index} outside series of length {len(self)}")
        return self.start + index * ONE_HOUR

    def index_of(self, ts: datetime) -> int:
        _check_wall_clock(ts, "timestamp")
        offset = ts - self.start
        idx, rem = divmod(int(offset.total_seconds()), 3600)
        if rem != 0:
            raise IndexOutOfRange(f"{ts} is not on the hourly grid of the series")
        if not 0 <= idx < len(self):
            raise IndexOutOfRange(f"{ts} outside series span {self.start}..{self.end}")
        return idx

    def covers(self, ts: datetime) -> bool:
        try:
            self.index_of(ts)
        except IndexOutOfRange:
            return False
        return True

    def window(self, start: datetime, n_hours: int) -> "HourlySeries":
        """Sub-series of `n_hours` observations starting at `start`."""
        i = self.index_of(start)
        if n_hours < 1 or i + n_hours > len(self):
            raise IndexOutOfRange(
                f"window {start} +{n_hours}h exceeds series end {self.end}"
            )
        return HourlySeries(start, self.values[i : i + n_hours], self.unit)

    def prefix(self, end: datetime) -> "HourlySeries":
        """Observations strictly before `end`."""
        if end <= self.start:
            raise IndexOutOfRange(f"no observations before {end}")
        n = min(len(self), int((end - self.start).total_seconds()) // 3600)
        return HourlySeries(self.start, self.values[:n], self.unit)

    def with_appended(self, extra: np.ndarray) -> "HourlySeries":
        """New series with `extra` hourly values appended at the end."""
        return HourlySeries(
            self.start, np.concatenate([self.values, np.asarray(extra, float)]), self.unit
        )


def stamp(series: HourlySeries, index: int) -> CalendarStamp:
    """Calendar stamp of observation `index` in `series`."""
    return stamp_of(series.timestamp(index))


def calendar_arrays(start: datetime, n_hours: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized calendar decoration for `n_hours` hours from `start`.

    Returns (period_of_week, day_of_year, year_length) int64 arrays. Matches
    stamp_of() elementwise; used on hot paths where per-hour datetime
    construction is too slow.
    """
    _check_wall_clock(start, "start")
    base = np.datetime64(start, "h")
    hours = base + np.arange(n_hours, dtype=np.int64)
    days = hours.astype("datetime64[D]")
    hod = (hours - days).astype(np.int64) + 1
    epoch_day = days.astype(np.int64)
    # 1970-01-01 is a Thursday (ISO day 4)
    dow = (epoch_day + 3) % 7 + 1
    years = days.astype("datetime64[Y]")
    doy = (days - years).astype(np.int64) + 1
    y = years.astype(np.int64) + 1970
    leap = (y % 4 == 0) & ((y % 100 != 0) | (y % 400 == 0))
    ylen = np.where(leap, 366, 365).astype(np.int64)
    pow_ = 24 * (dow - 1) + hod
    return pow_, doy, ylen


@dataclass(frozen=True)
class StationTable:
    """Aligned hourly temperature observations from 25 stations."""

    start: datetime
    stations: np.ndarray

    def __post_init__(self) -> None:
        _check_wall_clock(self.start, "table start")
        arr = np.ascontiguousarray(self.stations, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != N_STATIONS:
            raise ValueError(f"stations must be (n_hours, {N_STATIONS}), got {arr.shape}")
        if arr.shape[0] < 1:
            raise ValueError("station table is empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("station values must all be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "stations", arr)

    def __len__(self) -> int:
        return self.stations.shape[0]


def mean_temperature(table: StationTable) -> HourlySeries:
    """Per-hour arithmetic mean across the 25 stations."""
    return HourlySeries(table.start, table.stations.mean(axis=1), unit="temperature")


def prior_year_hour(ts: datetime) -> datetime:
    """Same calendar date and hour one year earlier; Feb 29 maps to Feb 28."""
    if ts.month == 2 and ts.day == 29:
        return ts.replace(year=ts.year - 1, day=28)
    return ts.replace(year=ts.year - 1)


def anchor_date(year: int, month: int, day: int) -> date:
    """date(year, month, day) with Feb 29 collapsed to Feb 28 off leap years."""
    if month == 2 and day == 29 and not calendar.isleap(year):
        day = 28
    return date(year, month, day)
