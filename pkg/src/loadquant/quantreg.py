"""Per-hour quantile regression fitted by linear programming.

Each hour of the day gets its own linear model in the day index k
(k = 1 on 2005-01-01):

    L_k = a0 + a1*k + sum_{p=1,2} b_p sin(2*pi*p*(k + PHI1)/365)
                    + sum_{m=1,2} c_m sin(2*pi*m*(k + PHI2)/365)

and each quantile level is fitted by minimizing the pinball loss, which is
an LP after splitting residuals into positive and negative parts. All 99
levels for one hour share a single tableau: only the cost vector changes
between levels, so consecutive fits warm-start from the previous basis.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from datetime import date, datetime, timedelta
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import HorizonMismatch, InsufficientHistory, InvalidConfig
from .optim import SimplexTableau
from .series import HourlySeries, ONE_HOUR

QUANTILE_LEVELS = np.arange(1, 100) / 100.0
QUANTILE_LEVELS.setflags(write=False)

PHI1 = -111.0
PHI2 = PHI1 - 364.0 / 2.0
SEASON_DAYS = 365.0
DAY_ONE = date(2005, 1, 1)

DEFAULT_WINDOW_DAYS = 500
MIN_WINDOW_DAYS = 60


@dataclass(frozen=True)
class QRModelParams:
    a0: float
    a1: float
    b: np.ndarray
    c: np.ndarray
    phi1: float = PHI1
    phi2: float = PHI2

    def __post_init__(self) -> None:
        b = np.asarray(self.b, dtype=np.float64)
        c = np.asarray(self.c, dtype=np.float64)
        if b.shape != (2,) or c.shape != (2,):
            raise InvalidConfig("b and c must each hold two coefficients")
        if abs((self.phi1 - self.phi2) - 182.0) > 1e-9:
            raise InvalidConfig("phi2 must equal phi1 - 182")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @classmethod
    def from_vector(cls, beta: np.ndarray) -> "QRModelParams":
        beta = np.asarray(beta, dtype=np.float64)
        return cls(a0=float(beta[0]), a1=float(beta[1]), b=beta[2:4], c=beta[4:6])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([[self.a0, self.a1], self.b, self.c])


@dataclass(frozen=True)
class QuantileForecast:
    """horizon_hours x 99 quantile trajectories starting at `start`."""

    start: datetime
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[1] != 99 or vals.shape[0] < 1:
            raise ValueError(f"values must be (horizon, 99), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("forecast values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def horizon_hours(self) -> int:
        return self.values.shape[0]

    def timestamp(self, row: int) -> datetime:
        return self.start + row * ONE_HOUR

    def rows(self, sel: slice) -> "QuantileForecast":
        sub = self.values[sel]
        return QuantileForecast(self.start + (sel.indices(self.horizon_hours)[0]) * ONE_HOUR, sub)


def pinball_loss_term(q: float, z) -> np.ndarray | float:
    """Pinball loss of residual z at level q: q*z if z >= 0 else (1-q)*|z|."""
    if not 0.0 < q < 1.0:
        raise InvalidConfig(f"quantile level must be in (0,1), got {q}")
    z = np.asarray(z, dtype=np.float64)
    out = np.where(z >= 0.0, q * z, (q - 1.0) * z)
    return float(out) if out.ndim == 0 else out


def day_index(d: date | datetime) -> int:
    """1-based calendar day count with day 1 = 2005-01-01."""
    if isinstance(d, datetime):
        d = d.date()
    return (d - DAY_ONE).days + 1


def qr_design(ks) -> np.ndarray:
    """Design rows [1, k, sin pairs at PHI1, sin pairs at PHI2] for day indices."""
    k = np.atleast_1d(np.asarray(ks, dtype=np.float64))
    cols = [np.ones_like(k), k]
    for p in (1, 2):
        cols.append(np.sin(2.0 * np.pi * p * (k + PHI1) / SEASON_DAYS))
    for m in (1, 2):
        cols.append(np.sin(2.0 * np.pi * m * (k + PHI2) / SEASON_DAYS))
    return np.column_stack(cols)


@dataclass(frozen=True)
class QuantileFit:
    coefficients: np.ndarray
    objective: float


class _QuantileSweep:
    """One tableau reused across quantile levels for a fixed design."""

    REFACTOR_EVERY = 32

    def __init__(self, design: np.ndarray, targets: np.ndarray, pivot_rule: str = "dantzig"):
        design = np.asarray(design, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.float64)
        if design.ndim != 2 or design.shape[0] != targets.size or design.shape[0] < 1:
            raise InvalidConfig("design must be (n, p) with one target per row")
        self.n, self.p = design.shape
        self.pivot_rule = pivot_rule
        self.scale = np.maximum(np.abs(design).max(axis=0), 1e-12)
        self._scaled = design / self.scale
        self._targets = targets
        # an interpolating fit minimizes every quantile level at once; the
        # fully degenerate LP this produces is not worth pivoting through
        coef, *_ = np.linalg.lstsq(self._scaled, targets, rcond=None)
        resid = targets - self._scaled @ coef
        if np.abs(resid).max() <= 1e-9 * (1.0 + np.abs(targets).max()):
            self._exact = (coef / self.scale, resid)
            self.tab = None
        else:
            self._exact = None
            self.tab = self._fresh_tableau()
        self._since_refactor = 0

    def _fresh_tableau(self) -> SimplexTableau:
        n, p = self.n, self.p
        sign = np.where(self._targets >= 0.0, 1.0, -1.0)
        # rows sign-flipped so that rhs >= 0 and one of u_i, v_i is basic
        body = np.empty((n, 2 * p + 2 * n))
        body[:, :p] = self._scaled * sign[:, None]
        body[:, p : 2 * p] = -body[:, :p]
        body[:, 2 * p :] = 0.0
        rows = np.arange(n)
        body[rows, 2 * p + rows] = sign
        body[rows, 2 * p + n + rows] = -sign
        basis = np.where(sign > 0, 2 * p + rows, 2 * p + n + rows)
        return SimplexTableau(body, np.abs(self._targets), basis)

    def fit(self, q: float) -> QuantileFit:
        if not 0.0 < q < 1.0:
            raise InvalidConfig(f"quantile level must be in (0,1), got {q}")
        if self._exact is not None:
            beta, resid = self._exact
            return QuantileFit(beta.copy(), float(np.sum(pinball_loss_term(q, resid))))
        n, p = self.n, self.p
        costs = np.concatenate([np.zeros(2 * p), np.full(n, q), np.full(n, 1.0 - q)])
        self.tab.set_objective(costs)
        try:
            self.tab.optimize(self.pivot_rule)
        except RuntimeError:
            # basis went numerically bad; restart this level from scratch
            self.tab = self._fresh_tableau()
            self.tab.set_objective(costs)
            self.tab.optimize("bland")
            self._since_refactor = 0
        self._since_refactor += 1
        if self._since_refactor >= self.REFACTOR_EVERY:
            if self.tab.refactorize():
                self.tab.optimize(self.pivot_rule)
            self._since_refactor = 0
        x = self.tab.primal()
        beta = (x[:p] - x[p : 2 * p]) / self.scale
        return QuantileFit(beta, float(self.tab.objective_value))

    def fit_all(self, qs) -> tuple[np.ndarray, np.ndarray]:
        betas = np.empty((len(qs), self.p))
        objs = np.empty(len(qs))
        for i, q in enumerate(qs):
            r = self.fit(float(q))
            betas[i] = r.coefficients
            objs[i] = r.objective
        return betas, objs


def fit_quantile_lp(design: np.ndarray, targets: np.ndarray, q: float) -> QuantileFit:
    """Fit one quantile level by LP; returns coefficients and LP objective."""
    return _QuantileSweep(design, targets).fit(q)


def repair_crossing(forecast: QuantileForecast) -> QuantileForecast:
    """Sort each hourly row ascending so quantiles cannot cross."""
    return QuantileForecast(forecast.start, np.sort(forecast.values, axis=1))


def _training_days(history: HourlySeries, horizon_start: datetime, window_days: int):
    """Last `window_days` complete calendar days of history before the horizon."""
    last_day = horizon_start.date() - timedelta(days=1)
    first_hist_day = history.start.date()
    if history.start.hour != 0:
        first_hist_day += timedelta(days=1)
    last_hist_day = history.end.date()
    if history.end.hour != 23:
        last_hist_day -= timedelta(days=1)
    end_day = min(last_day, last_hist_day)
    start_day = max(first_hist_day, end_day - timedelta(days=window_days - 1))
    n_days = (end_day - start_day).days + 1
    if n_days < MIN_WINDOW_DAYS:
        raise InsufficientHistory(
            f"{n_days} usable training days < floor of {MIN_WINDOW_DAYS}"
        )
    if n_days < window_days:
        warnings.warn(
            f"only {n_days} training days available, below the {window_days}-day window",
            stacklevel=3,
        )
    return start_day, n_days


def qr_forecast(
    history: HourlySeries,
    horizon_start: datetime,
    horizon_hours: int,
    window_days: int = DEFAULT_WINDOW_DAYS,
    pivot_rule: str = "dantzig",
    workers: int = 1,
) -> QuantileForecast:
    """Quantile-regression forecast: 24 hourly models x 99 LP fits each."""
    if horizon_hours < 1:
        raise InvalidConfig("horizon_hours must be >= 1")
    start_day, n_days = _training_days(history, horizon_start, window_days)
    day0_index = history.index_of(datetime(start_day.year, start_day.month, start_day.day))
    ks = np.array([day_index(start_day + timedelta(days=i)) for i in range(n_days)], dtype=float)
    design = qr_design(ks)

    horizon_ts = [horizon_start + i * ONE_HOUR for i in range(horizon_hours)]
    hours_needed = sorted({ts.hour for ts in horizon_ts})

    def fit_hour(hour: int) -> np.ndarray:
        idx = day0_index + hour + 24 * np.arange(n_days)
        targets = history.values[idx]
        betas, _ = _QuantileSweep(design, targets, pivot_rule).fit_all(QUANTILE_LEVELS)
        return betas

    if workers > 1 and len(hours_needed) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fitted = dict(zip(hours_needed, pool.map(fit_hour, hours_needed)))
    else:
        fitted = {h: fit_hour(h) for h in hours_needed}

    out = np.empty((horizon_hours, 99))
    for i, ts in enumerate(horizon_ts):
        row = qr_design([day_index(ts)])[0]
        out[i] = fitted[ts.hour] @ row
    return repair_crossing(QuantileForecast(horizon_start, out))


def align_forecasts(*forecasts: QuantileForecast) -> int:
    """Common horizon check; returns the shared horizon length."""
    first = forecasts[0]
    for fc in forecasts[1:]:
        if fc.start != first.start or fc.horizon_hours != first.horizon_hours:
            raise HorizonMismatch(
                f"forecast {fc.start}+{fc.horizon_hours}h does not align with "
                f"{first.start}+{first.horizon_hours}h"
            )
    return first.horizon_hours
