"""Pinball scoring, the previous-year benchmark, and task aggregation.

A task score is the mean pinball loss over every horizon hour and all 99
quantile levels. The benchmark repeats last year's observed load across all
levels; the headline number is a weighted average of percentage improvement
over that benchmark, with weights rising linearly from a chosen task onward.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import EmptyTasks, HorizonMismatch, MissingPriorYear
from .quantreg import QUANTILE_LEVELS, QuantileForecast
from .series import HourlySeries, ONE_HOUR, prior_year_hour


def mean_pinball(values: np.ndarray, actuals: np.ndarray) -> float:
    """Mean pinball of a (H, 99) quantile matrix against H actuals."""
    values = np.asarray(values, dtype=np.float64)
    actuals = np.asarray(actuals, dtype=np.float64)
    if values.ndim != 2 or values.shape != (actuals.size, 99):
        raise HorizonMismatch(
            f"quantile matrix {values.shape} does not match {actuals.size} actuals"
        )
    z = actuals[:, None] - values
    q = QUANTILE_LEVELS[None, :]
    return float(np.mean(np.where(z >= 0.0, q * z, (q - 1.0) * z)))


def pinball_score(forecast: QuantileForecast, actuals: HourlySeries) -> float:
    """Mean pinball of a forecast against aligned realized loads."""
    if actuals.start != forecast.start or len(actuals) != forecast.horizon_hours:
        raise HorizonMismatch(
            f"actuals {actuals.start}+{len(actuals)}h do not align with forecast "
            f"{forecast.start}+{forecast.horizon_hours}h"
        )
    return mean_pinball(forecast.values, actuals.values)


def benchmark_forecast(
    history: HourlySeries, horizon_start: datetime, horizon_hours: int
) -> QuantileForecast:
    """Previous year's load at the same date and hour, repeated across levels.

    Feb 29 targets read the prior year's Feb 28.
    """
    vals = np.empty(horizon_hours)
    for i in range(horizon_hours):
        ts = prior_year_hour(horizon_start + i * ONE_HOUR)
        if not history.covers(ts):
            raise MissingPriorYear(f"history does not contain {ts}")
        vals[i] = history.values[history.index_of(ts)]
    return QuantileForecast(horizon_start, np.repeat(vals[:, None], 99, axis=1))


@dataclass(frozen=True)
class TaskScore:
    task_id: int
    pinball: float
    benchmark_pinball: float
    improvement_pct: float

    @classmethod
    def from_pinballs(cls, task_id: int, pinball: float, benchmark: float) -> "TaskScore":
        imp = 100.0 * (benchmark - pinball) / benchmark if benchmark > 0 else 0.0
        return cls(task_id, pinball, benchmark, imp)


def weighted_final_score(tasks: Sequence[TaskScore], weight_start_task: int) -> float:
    """Linearly rising task weights from `weight_start_task`, normalized.

    Task t gets raw weight max(1, t - weight_start_task + 1); the result is
    the weight-normalized sum of percentage improvements.
    """
    if not tasks:
        raise EmptyTasks("no task scores to aggregate")
    ids = [t.task_id for t in tasks]
    if any(b <= a for a, b in zip(ids, ids[1:])):
        raise EmptyTasks("tasks must be ordered by ascending task_id")
    raw = np.array([max(1, t.task_id - weight_start_task + 1) for t in tasks], dtype=float)
    weights = raw / raw.sum()
    return float(np.dot(weights, [t.improvement_pct for t in tasks]))


Forecaster = Callable[[HourlySeries, datetime, int], QuantileForecast]


@dataclass(frozen=True)
class MethodScore:
    method: str
    task_id: int
    pinball: float
    benchmark_pinball: float
    improvement_pct: float
    weighted_score: float


def run_task(
    methods: Mapping[str, Forecaster],
    data: HourlySeries,
    train_end: datetime,
    horizon_hours: int,
    task_id: int = 1,
) -> list[MethodScore]:
    """Forecast one held-out month with every method and score it.

    `data` must cover both training and the horizon; each forecaster is
    called with (history, horizon_start, horizon_hours) where history stops
    at train_end. Output rows are ordered by descending weighted score.
    """
    history = data.prefix(train_end)
    actuals = data.window(train_end, horizon_hours)
    bench = benchmark_forecast(data.prefix(train_end), train_end, horizon_hours)
    bench_pin = pinball_score(bench, actuals)

    rows: list[MethodScore] = []
    for name in sorted(methods):
        fc = methods[name](history, train_end, horizon_hours)
        pin = pinball_score(fc, actuals)
        score = TaskScore.from_pinballs(task_id, pin, bench_pin)
        rows.append(
            MethodScore(
                method=name,
                task_id=task_id,
                pinball=pin,
                benchmark_pinball=bench_pin,
                improvement_pct=score.improvement_pct,
                weighted_score=score.improvement_pct,
            )
        )
    rows.sort(key=lambda r: (-r.weighted_score, r.method))
    return rows


SCORE_HEADER = "method,task,pinball,benchmark_pinball,improvement_pct,weighted_score"


def write_score_csv(rows: Sequence[MethodScore], path) -> None:
    from .dataio import _open_out

    with _open_out(path) as fh:
        fh.write(SCORE_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r.method},{r.task_id},{r.pinball!r},{r.benchmark_pinball!r},"
                f"{r.improvement_pct!r},{r.weighted_score!r}\n"
            )


def write_plot_data(rows: Sequence[MethodScore], path) -> None:
    """task,method,pinball rows for plotting score trajectories."""
    from .dataio import _open_out

    with _open_out(path) as fh:
        fh.write("task,method,pinball\n")
        for r in rows:
            fh.write(f"{r.task_id},{r.method},{r.pinball!r}\n")
