"""Forecast splicing and per-period hybrid combination.

A month horizon splits into five periods: day 1, the rest of week 1, week 2,
week 3, and everything after day 21. mix1/mix2 splice whole forecasts at
period boundaries; the hybrid blends week-conditional and quantile-regression
quantile curves with one trained weight per period (day 1 always comes from
the temperature-conditional forecast).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import HorizonMismatch, InvalidConfig, IoError, MalformedRow, NoTasks
from .quantreg import QuantileForecast, align_forecasts, repair_crossing
from .series import HourlySeries

PERIOD_TAUS = (1, 2, 3, 4, 5)
# inclusive day ranges per period; period 5 is open-ended
_PERIOD_DAYS = {1: (1, 1), 2: (2, 7), 3: (8, 14), 4: (15, 21), 5: (22, None)}

DEFAULT_WEIGHT_GRID = tuple(round(0.05 * i, 2) for i in range(21))


def period_of_hour(hour_offset: int) -> int:
    """Period tau (1..5) of a 0-based horizon hour offset."""
    if hour_offset < 0:
        raise InvalidConfig("hour offset must be nonnegative")
    day = hour_offset // 24 + 1
    for tau, (lo, hi) in _PERIOD_DAYS.items():
        if day >= lo and (hi is None or day <= hi):
            return tau
    raise AssertionError("unreachable")


def period_slices(horizon_hours: int) -> dict[int, slice]:
    """Slice of horizon rows covered by each period present in the horizon."""
    out: dict[int, slice] = {}
    for tau, (lo, hi) in _PERIOD_DAYS.items():
        first = (lo - 1) * 24
        if first >= horizon_hours:
            break
        last = horizon_hours if hi is None else min(hi * 24, horizon_hours)
        out[tau] = slice(first, last)
    return out


@dataclass(frozen=True)
class HybridWeights:
    """Blend weight per period tau=2..5; weight 1 means pure week-conditional."""

    w: dict[int, float]

    def __post_init__(self) -> None:
        if set(self.w) != {2, 3, 4, 5}:
            raise InvalidConfig("weights must cover exactly tau = 2..5")
        for tau, val in self.w.items():
            if not 0.0 <= val <= 1.0:
                raise InvalidConfig(f"weight for tau={tau} outside [0, 1]: {val}")
        object.__setattr__(self, "w", dict(self.w))

    def __getitem__(self, tau: int) -> float:
        return self.w[tau]


def _check_day1(ckdt_day1: QuantileForecast) -> None:
    if ckdt_day1.horizon_hours != 24:
        raise HorizonMismatch(
            f"day-one forecast must cover exactly 24 hours, got {ckdt_day1.horizon_hours}"
        )


def mix1(ckdw: QuantileForecast, ckdt_day1: QuantileForecast) -> QuantileForecast:
    """Week-conditional forecast with the first day replaced by ckd-t."""
    _check_day1(ckdt_day1)
    if ckdw.start != ckdt_day1.start or ckdw.horizon_hours < 24:
        raise HorizonMismatch("forecasts must share a start and cover day one")
    vals = ckdw.values.copy()
    vals[:24] = ckdt_day1.values
    return QuantileForecast(ckdw.start, vals)


def mix2(
    ckdw: QuantileForecast, ckdt_day1: QuantileForecast, qr: QuantileForecast
) -> QuantileForecast:
    """Day 1 from ckd-t, days 2-7 from ckd-w, day 8 onward from qr."""
    align_forecasts(ckdw, qr)
    base = mix1(ckdw, ckdt_day1)
    vals = base.values.copy()
    if vals.shape[0] > 168:
        vals[168:] = qr.values[168:]
    return QuantileForecast(base.start, vals)


def hybrid(
    ckdw: QuantileForecast,
    ckdt_day1: QuantileForecast,
    qr: QuantileForecast,
    weights: HybridWeights,
) -> QuantileForecast:
    """Per-period convex blend of ckd-w and qr quantiles, ckd-t on day one."""
    horizon = align_forecasts(ckdw, qr)
    _check_day1(ckdt_day1)
    if ckdt_day1.start != ckdw.start or horizon < 24:
        raise HorizonMismatch("forecasts must share a start and cover day one")
    vals = np.empty_like(ckdw.values)
    vals[:24] = ckdt_day1.values
    for tau, sel in period_slices(horizon).items():
        if tau == 1:
            continue
        w = weights[tau]
        vals[sel] = w * ckdw.values[sel] + (1.0 - w) * qr.values[sel]
    return repair_crossing(QuantileForecast(ckdw.start, vals))


@dataclass(frozen=True)
class HybridTask:
    """Aligned past-task forecasts and the realized loads for weight training."""

    ckdw: QuantileForecast
    qr: QuantileForecast
    actuals: HourlySeries

    def __post_init__(self) -> None:
        horizon = align_forecasts(self.ckdw, self.qr)
        if self.actuals.start != self.ckdw.start or len(self.actuals) != horizon:
            raise HorizonMismatch("actuals must cover exactly the forecast horizon")


def train_weights(
    tasks: Sequence[HybridTask], grid: Sequence[float] = DEFAULT_WEIGHT_GRID
) -> HybridWeights:
    """Average, over tasks, of the per-period pinball-optimal blend weight.

    Ties on a task prefer the smaller weight. Periods absent from every task
    default to weight 1 (pure week-conditional).
    """
    from .evaluation import mean_pinball

    if not tasks:
        raise NoTasks("need at least one past task to train weights")
    grid_arr = np.asarray(list(grid), dtype=np.float64)
    if grid_arr.size == 0 or np.any(grid_arr < 0.0) or np.any(grid_arr > 1.0):
        raise InvalidConfig("weight grid must be nonempty within [0, 1]")

    sums = {tau: 0.0 for tau in (2, 3, 4, 5)}
    counts = {tau: 0 for tau in (2, 3, 4, 5)}
    for task in tasks:
        slices = period_slices(task.ckdw.horizon_hours)
        for tau, sel in slices.items():
            if tau == 1:
                continue
            fa = task.ckdw.values[sel]
            fb = task.qr.values[sel]
            act = task.actuals.values[sel]
            losses = [
                mean_pinball(w * fa + (1.0 - w) * fb, act) for w in grid_arr
            ]
            sums[tau] += float(grid_arr[int(np.argmin(losses))])
            counts[tau] += 1
    w = {
        tau: (sums[tau] / counts[tau]) if counts[tau] else 1.0
        for tau in (2, 3, 4, 5)
    }
    return HybridWeights(w)


def write_weights(weights: HybridWeights, path) -> None:
    """Persist weights as tau,weight lines."""
    parent = Path(path).parent
    if not parent.is_dir():
        raise IoError(f"output directory {parent} does not exist")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tau in (2, 3, 4, 5):
            fh.write(f"{tau},{weights[tau]!r}\n")


def read_weights(path) -> HybridWeights:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    w: dict[int, float] = {}
    for ln in lines:
        if not ln.strip():
            continue
        parts = ln.split(",")
        if len(parts) != 2:
            raise MalformedRow(f"bad weights line {ln!r}")
        try:
            w[int(parts[0])] = float(parts[1])
        except ValueError:
            raise MalformedRow(f"bad weights line {ln!r}") from None
    return HybridWeights(w)
