"""Synthetic load and temperature data for desk-scale experiments.

The generator produces the qualitative structure real system load shows:
trend, daily/weekly/annual cycles, a piecewise-linear heating/cooling
response to temperature, and Gaussian noise. All coefficients end up in a
params mapping so tests can recompute the exact closed form.
"""
from __future__ import annotations

import calendar
from dataclasses import dataclass, fields
from datetime import datetime
from typing import NamedTuple

import numpy as np

from .errors import InvalidConfig
from .series import HourlySeries, N_STATIONS, StationTable, stamp_of

# phase constants (hours for diurnal terms, days for annual terms)
DAILY_PHASE = -12.0
WEEKLY_PHASE = 0.0
ANNUAL_PHASE = 76.0
TEMP_ANNUAL_PHASE = -91.3125
TEMP_DIURNAL_PHASE = -9.0
DAYS_PER_YEAR = 365.25


@dataclass(frozen=True)
class SynthConfig:
    years: int = 4
    start_year: int = 2008
    base_load: float = 3000.0
    trend_per_hour: float = 0.002
    daily_amplitude: float = 300.0
    weekly_amplitude: float = 100.0
    annual_amplitude: float = 250.0
    heating_coef: float = 12.0
    heating_ref: float = 55.0
    cooling_coef: float = 15.0
    cooling_ref: float = 65.0
    load_noise_sd: float = 120.0
    temp_mean: float = 55.0
    temp_annual_amplitude: float = 20.0
    temp_diurnal_amplitude: float = 8.0
    station_offset_sd: float = 2.0
    temp_noise_sd: float = 3.0

    def __post_init__(self) -> None:
        if self.years < 2:
            raise InvalidConfig("need at least 2 years of synthetic data")
        if self.load_noise_sd < 0 or self.temp_noise_sd < 0 or self.station_offset_sd < 0:
            raise InvalidConfig("noise scales must be nonnegative")


class SyntheticData(NamedTuple):
    load: HourlySeries
    temps: StationTable
    params: dict


def _hours_in_span(start_year: int, years: int) -> int:
    days = sum(366 if calendar.isleap(y) else 365 for y in range(start_year, start_year + years))
    return 24 * days


def generate_synthetic(config: SynthConfig, seed: int) -> SyntheticData:
    """Deterministic synthetic (load, station temperatures, params) triple."""
    n = _hours_in_span(config.start_year, config.years)
    start = datetime(config.start_year, 1, 1)
    rng = np.random.default_rng(seed)

    t = np.arange(n, dtype=np.float64)
    hour_of_day = t % 24.0
    day = t / 24.0
    pow0 = stamp_of(start).period_of_week
    period_of_week = (pow0 - 1 + np.arange(n, dtype=np.int64)) % 168 + 1

    offsets = rng.normal(0.0, config.station_offset_sd, size=N_STATIONS)
    temp_shared = (
        config.temp_mean
        + config.temp_annual_amplitude * np.sin(2 * np.pi * (day + TEMP_ANNUAL_PHASE) / DAYS_PER_YEAR)
        + config.temp_diurnal_amplitude * np.sin(2 * np.pi * (hour_of_day + TEMP_DIURNAL_PHASE) / 24.0)
    )
    temps = (
        temp_shared[:, None]
        + offsets[None, :]
        + config.temp_noise_sd * rng.standard_normal((n, N_STATIONS))
    )
    mean_temp = temps.mean(axis=1)

    load = (
        config.base_load
        + config.trend_per_hour * t
        + config.daily_amplitude * np.sin(2 * np.pi * (hour_of_day + DAILY_PHASE) / 24.0)
        + config.weekly_amplitude * np.sin(2 * np.pi * (period_of_week + WEEKLY_PHASE) / 168.0)
        + config.annual_amplitude * np.sin(2 * np.pi * (day + ANNUAL_PHASE) / DAYS_PER_YEAR)
        + config.heating_coef * np.clip(config.heating_ref - mean_temp, 0.0, None)
        + config.cooling_coef * np.clip(mean_temp - config.cooling_ref, 0.0, None)
        + config.load_noise_sd * rng.standard_normal(n)
    )

    params = {f.name: getattr(config, f.name) for f in fields(config)}
    params.update(
        seed=seed,
        daily_phase=DAILY_PHASE,
        weekly_phase=WEEKLY_PHASE,
        annual_phase=ANNUAL_PHASE,
        temp_annual_phase=TEMP_ANNUAL_PHASE,
        temp_diurnal_phase=TEMP_DIURNAL_PHASE,
        days_per_year=DAYS_PER_YEAR,
        station_offsets=offsets.tolist(),
    )
    return SyntheticData(
        load=HourlySeries(start, load, unit="load"),
        temps=StationTable(start, temps),
        params=params,
    )
