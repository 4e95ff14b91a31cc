"""Autoregressive Fourier model for the mean temperature series.

The hourly temperature at absolute hour j (j = 0 at 2005-01-01 00:00) is
modeled as trend + diurnal Fourier pairs + annual sine terms + 25 lagged
temperatures:

    T_j = beta0 + beta1*j
          + sum_{p=1..4} gamma_p sin(2 pi p d(j)/24) + delta_p cos(2 pi p d(j)/24)
          + sum_{m=1..3} psi_m sin(2 pi m (f(j) + phi)/365)
          + sum_{k=1..25} alpha_k T_{j-k}

with d(j) = j mod 24, f(j) = j/24 (real-valued, not floored) and phi = -85.
Coefficients are fitted by least squares on an internally column-scaled
design; forecasts iterate one step at a time, feeding predictions back in
as lag inputs.

Design rows (and coefficient vectors) are ordered
[1, j, sin_1, cos_1, ..., sin_4, cos_4, annual_1..3, lag_1..25], 38 entries.
"""
from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

import numpy as np

from .errors import InsufficientHistory, InvalidConfig, RankDeficient, ZeroActual
from .series import HourlySeries, ONE_HOUR

P_DIURNAL = 4
M_ANNUAL = 3
N_LAGS = 25
PHI_DAYS = -85.0
_SEAS_LEN = 2 + 2 * P_DIURNAL + M_ANNUAL  # 13
N_COEFFS = _SEAS_LEN + N_LAGS  # 38
EPOCH = datetime(2005, 1, 1)
MIN_FIT_ROWS = 100


@dataclass(frozen=True)
class TemperatureModelParams:
    beta0: float
    beta1: float
    gamma: np.ndarray
    delta: np.ndarray
    psi: np.ndarray
    alpha: np.ndarray
    phi: float = PHI_DAYS

    def __post_init__(self) -> None:
        gamma = np.asarray(self.gamma, dtype=np.float64)
        delta = np.asarray(self.delta, dtype=np.float64)
        psi = np.asarray(self.psi, dtype=np.float64)
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if gamma.shape != (P_DIURNAL,) or delta.shape != (P_DIURNAL,):
            raise InvalidConfig(f"gamma/delta must have {P_DIURNAL} entries")
        if psi.shape != (M_ANNUAL,):
            raise InvalidConfig(f"psi must have {M_ANNUAL} entries")
        if alpha.shape != (N_LAGS,):
            raise InvalidConfig(f"alpha must have {N_LAGS} entries")
        vec = np.concatenate([[self.beta0, self.beta1], gamma, delta, psi, alpha])
        if not np.all(np.isfinite(vec)):
            raise InvalidConfig("coefficients must be finite")
        for name, arr in (("gamma", gamma), ("delta", delta), ("psi", psi), ("alpha", alpha)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_vector(cls, vec: np.ndarray, phi: float = PHI_DAYS) -> "TemperatureModelParams":
        """Build from a design-ordered coefficient vector."""
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (N_COEFFS,):
            raise InvalidConfig(f"coefficient vector must have {N_COEFFS} entries")
        return cls(
            beta0=float(vec[0]),
            beta1=float(vec[1]),
            gamma=vec[2 : 2 + 2 * P_DIURNAL : 2],
            delta=vec[3 : 3 + 2 * P_DIURNAL : 2],
            psi=vec[2 + 2 * P_DIURNAL : _SEAS_LEN],
            alpha=vec[_SEAS_LEN:],
            phi=phi,
        )

    def to_vector(self) -> np.ndarray:
        """Design-ordered coefficient vector (inverse of from_vector)."""
        vec = np.empty(N_COEFFS)
        vec[0] = self.beta0
        vec[1] = self.beta1
        vec[2 : 2 + 2 * P_DIURNAL : 2] = self.gamma
        vec[3 : 3 + 2 * P_DIURNAL : 2] = self.delta
        vec[2 + 2 * P_DIURNAL : _SEAS_LEN] = self.psi
        vec[_SEAS_LEN:] = self.alpha
        return vec


def hour_index(ts: datetime) -> int:
    """Absolute hour count since the 2005-01-01 00:00 epoch."""
    return int((ts - EPOCH).total_seconds()) // 3600


def _seasonal_columns(j: np.ndarray, phi: float) -> np.ndarray:
    """[1, j, (sin_p, cos_p) pairs, annual sines] for absolute hours j."""
    j = np.asarray(j, dtype=np.float64)
    d = np.mod(j, 24.0)
    f = j / 24.0
    cols = [np.ones_like(j), j]
    for p in range(1, P_DIURNAL + 1):
        cols.append(np.sin(2.0 * np.pi * p * d / 24.0))
        cols.append(np.cos(2.0 * np.pi * p * d / 24.0))
    for m in range(1, M_ANNUAL + 1):
        cols.append(np.sin(2.0 * np.pi * m * (f + phi) / 365.0))
    return np.column_stack(cols)


def build_design(
    temps: HourlySeries, first_row: int, last_row: int, phi: float = PHI_DAYS
) -> tuple[np.ndarray, np.ndarray]:
    """Design matrix and target vector for series rows [first_row, last_row).

    Row i regresses T_i on [1, j(i), diurnal pairs, annual sines,
    T_{i-1}..T_{i-25}]; requires first_row >= 25 so lags exist.
    """
    n = len(temps)
    if first_row < N_LAGS:
        raise InsufficientHistory(f"first row must be >= {N_LAGS} to provide lags")
    if not first_row < last_row <= n:
        raise InvalidConfig(f"bad row range [{first_row}, {last_row}) for series of {n}")
    rows = np.arange(first_row, last_row, dtype=np.int64)
    j0 = hour_index(temps.start)
    seasonal = _seasonal_columns(j0 + rows, phi)
    lag_cols = np.column_stack([temps.values[rows - k] for k in range(1, N_LAGS + 1)])
    return np.column_stack([seasonal, lag_cols]), temps.values[rows].copy()


def fit_temperature(
    temps: HourlySeries,
    first_row: int = N_LAGS,
    last_row: int | None = None,
    phi: float = PHI_DAYS,
) -> TemperatureModelParams:
    """Least-squares fit of the 38 coefficients.

    Solved on a column-scaled copy through an orthogonal decomposition;
    raises RankDeficient when the scaled design loses numerical rank.
    """
    last = last_row if last_row is not None else len(temps)
    design, target = build_design(temps, first_row, last, phi)
    if design.shape[0] < MIN_FIT_ROWS:
        raise InsufficientHistory(
            f"need at least {MIN_FIT_ROWS} rows to fit, got {design.shape[0]}"
        )
    scale = np.linalg.norm(design, axis=0)
    if np.any(scale == 0.0):
        raise RankDeficient("design contains an all-zero column")
    coef_scaled, _, rank, _ = np.linalg.lstsq(design / scale, target, rcond=None)
    if rank < N_COEFFS:
        raise RankDeficient(f"design rank {rank} < {N_COEFFS}")
    return TemperatureModelParams.from_vector(coef_scaled / scale, phi=phi)


def forecast_temperature(
    params: TemperatureModelParams, history: HourlySeries, horizon_hours: int
) -> HourlySeries:
    """Iterated one-step forecast; predictions feed back in as lag inputs."""
    if horizon_hours < 1:
        raise InvalidConfig("horizon_hours must be >= 1")
    if len(history) < N_LAGS:
        raise InsufficientHistory(f"need {N_LAGS} observations of history")
    start = history.end + ONE_HOUR
    j_first = hour_index(start)
    seasonal = _seasonal_columns(np.arange(j_first, j_first + horizon_hours), params.phi)
    vec = params.to_vector()
    seas_coef = vec[:_SEAS_LEN]
    lag_coef = vec[_SEAS_LEN:]
    lags = list(history.values[-N_LAGS:][::-1])  # lags[0] = T_{j-1}
    out = np.empty(horizon_hours)
    for i in range(horizon_hours):
        pred = float(seasonal[i] @ seas_coef + np.dot(lag_coef, lags))
        out[i] = pred
        lags.insert(0, pred)
        lags.pop()
    return HourlySeries(start, out, unit="temperature")


def mape(actual: HourlySeries, predicted: HourlySeries) -> float:
    """Mean absolute percentage error, in percent."""
    if len(actual) != len(predicted) or actual.start != predicted.start:
        raise InvalidConfig("series must align for MAPE")
    a = actual.values
    if np.any(a == 0.0):
        raise ZeroActual("MAPE undefined when an actual value is zero")
    return float(100.0 * np.mean(np.abs(a - predicted.values) / np.abs(a)))
