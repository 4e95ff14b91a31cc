"""Kernel density forecasting: plain, week-period and temperature-conditional.

The family shares one Gaussian kernel. A density is a weighted mixture of
Gaussians centered on historical load values:

    kde_plain      uniform weights over all history
    kdew_density   same weekly period only, geometric annual-distance decay
    ckdw_density   every observation, decay times a week-period kernel
    ckdt_density   observations in an 11-day window of previous years,
                   weighted by temperature proximity (no decay)

Quantiles come from inverting the mixture CDF with a bracketed, secant-
accelerated bisection that only ever touches mixture components near the
current bracket, so cost scales with local mass rather than history length.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import (
    BracketFailure,
    EmptyHistory,
    EmptyWindow,
    InvalidConfig,
    NoMatchingPeriod,
    WindowOutsideHistory,
)
from .optim import (
    ScalarObjective,
    VectorObjective,
    minimize_bounded_scalar,
    minimize_nelder_mead,
)
from .quantreg import QUANTILE_LEVELS, QuantileForecast
from .series import CalendarStamp, HourlySeries, ONE_HOUR, anchor_date, calendar_arrays, stamp_of

SQRT_2PI = math.sqrt(2.0 * math.pi)

KDE_W = "kde-w"
CKD_W = "ckd-w"
CKD_T = "ckd-t"
KERNEL_METHODS = (KDE_W, CKD_W, CKD_T)

# observations before this epoch are ignored by the week-conditional method
CKDW_HISTORY_EPOCH = datetime(2008, 1, 1)

CKDT_DAY_RADIUS = 5

DEFAULT_LAMBDA_GRID = tuple(round(0.92 + 0.01 * i, 2) for i in range(9))


@dataclass(frozen=True)
class KernelParams:
    """Bandwidths and time decay for the kernel family.

    h_w only applies to the week-conditional method, h_t only to the
    temperature-conditional one.
    """

    h_x: float
    lam: float = 1.0
    h_w: Optional[float] = None
    h_t: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.h_x > 0:
            raise InvalidConfig(f"h_x must be positive, got {self.h_x}")
        if not 0.0 < self.lam <= 1.0:
            raise InvalidConfig(f"lam must be in (0, 1], got {self.lam}")
        if self.h_w is not None and not self.h_w > 0:
            raise InvalidConfig(f"h_w must be positive, got {self.h_w}")
        if self.h_t is not None and not self.h_t > 0:
            raise InvalidConfig(f"h_t must be positive, got {self.h_t}")


class WeightedSample(NamedTuple):
    value: float
    weight: float


@dataclass(frozen=True)
class DensityEstimate:
    """Gaussian mixture over historical values; weights normalized to 1."""

    centers: np.ndarray
    weights: np.ndarray
    bandwidth: float

    def __post_init__(self) -> None:
        c = np.ascontiguousarray(self.centers, dtype=np.float64)
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if c.ndim != 1 or c.size < 1 or w.shape != c.shape:
            raise ValueError("centers and weights must be matching nonempty vectors")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(w))):
            raise ValueError("centers and weights must be finite")
        if np.any(w < 0.0):
            raise ValueError("weights must be nonnegative")
        total = w.sum()
        if total <= 0.0:
            raise ValueError("weights must not all be zero")
        w = w / total
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        c.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "weights", w)

    @property
    def samples(self) -> list[WeightedSample]:
        return [WeightedSample(float(v), float(w)) for v, w in zip(self.centers, self.weights)]

    def pdf(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        z = (x[:, None] - self.centers[None, :]) / self.bandwidth
        return np.exp(-0.5 * z * z) @ self.weights / (self.bandwidth * SQRT_2PI)

    def cdf(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        z = (x[:, None] - self.centers[None, :]) / self.bandwidth
        return ndtr(z) @ self.weights


def gaussian_kernel(u):
    """Standard Gaussian kernel (2*pi)^(-1/2) exp(-u^2/2); accepts arrays."""
    u = np.asarray(u, dtype=np.float64)
    out = np.exp(-0.5 * u * u) / SQRT_2PI
    return float(out) if out.ndim == 0 else out


def decay_exponent(forecast_day: CalendarStamp, hist_day: CalendarStamp) -> int:
    """Annual-periodic day distance between forecast and historical days.

    Symmetric around the forecast date with a one-day correction for
    historical days past day 28 of leap years.
    """
    d = forecast_day.day_of_year
    hd = hist_day.day_of_year
    ylen = hist_day.year_length
    indicator = 1 if (hd > 28 and ylen == 366) else 0
    return int(min(abs(d - (hd - indicator)), ylen - abs(d - hd)))


def _decay_exponents(forecast_doy: int, hist_doy: np.ndarray, hist_ylen: np.ndarray) -> np.ndarray:
    ind = ((hist_doy > 28) & (hist_ylen == 366)).astype(np.int64)
    plain = np.abs(forecast_doy - hist_doy)
    return np.minimum(np.abs(forecast_doy - (hist_doy - ind)), hist_ylen - plain)


def week_kernel_weights(periods, target_period: float, h_w: float, circular: bool = False) -> np.ndarray:
    """Unnormalized week-period kernel weights K((w_i - w)/h_w).

    The default is the plain arithmetic difference of period labels; the
    circular variant measures min(|d|, 168 - |d|) around the week.
    """
    delta = np.asarray(periods, dtype=np.float64) - float(target_period)
    if circular:
        a = np.abs(delta)
        delta = np.minimum(a, 168.0 - a)
    return gaussian_kernel(delta / h_w)


def kde_plain(history, params: KernelParams) -> DensityEstimate:
    """Uniform-weight density over all history values."""
    values = np.asarray(history, dtype=np.float64).ravel()
    if values.size == 0:
        raise EmptyHistory("no observations for the plain density")
    w = np.full(values.size, 1.0 / values.size)
    return DensityEstimate(values, w, params.h_x)


def _normalized_exp(logw: np.ndarray) -> np.ndarray:
    logw = logw - logw.max()
    w = np.exp(logw)
    return w / w.sum()


def kdew_density(history: HourlySeries, target: CalendarStamp, params: KernelParams) -> DensityEstimate:
    """Density over same-period observations with annual-distance decay."""
    pow_, doy, ylen = calendar_arrays(history.start, len(history))
    idx = np.flatnonzero(pow_ == target.period_of_week)
    if idx.size == 0:
        raise NoMatchingPeriod(f"no observation at weekly period {target.period_of_week}")
    alpha = _decay_exponents(target.day_of_year, doy[idx], ylen[idx])
    w = _normalized_exp(alpha * math.log(params.lam))
    return DensityEstimate(history.values[idx], w, params.h_x)


def ckdw_density(
    history: HourlySeries,
    target: CalendarStamp,
    params: KernelParams,
    circular_week: bool = False,
) -> DensityEstimate:
    """Density over all (post-epoch) observations, decay times period kernel."""
    if params.h_w is None:
        raise InvalidConfig("week-conditional density requires h_w")
    if len(history) == 0:
        raise EmptyHistory("no observations")
    work = history
    if history.start < CKDW_HISTORY_EPOCH <= history.end:
        work = history.window(
            CKDW_HISTORY_EPOCH,
            len(history) - history.index_of(CKDW_HISTORY_EPOCH),
        )
    pow_, doy, ylen = calendar_arrays(work.start, len(work))
    alpha = _decay_exponents(target.day_of_year, doy, ylen)
    delta = pow_.astype(np.float64) - float(target.period_of_week)
    if circular_week:
        a = np.abs(delta)
        delta = np.minimum(a, 168.0 - a)
    logw = alpha * math.log(params.lam) - 0.5 * (delta / params.h_w) ** 2
    return DensityEstimate(work.values, _normalized_exp(logw), params.h_x)


def _ckdt_window_indices(history: HourlySeries, target_time: datetime) -> np.ndarray:
    """History indices at the target hour, within +-5 days of the target's
    calendar date in every previous year."""
    idxs: list[int] = []
    for year in range(history.start.year - 1, target_time.year):
        anchor = anchor_date(year, target_time.month, target_time.day)
        for off in range(-CKDT_DAY_RADIUS, CKDT_DAY_RADIUS + 1):
            day = anchor + timedelta(days=off)
            ts = datetime(day.year, day.month, day.day, target_time.hour)
            if history.covers(ts):
                idxs.append(history.index_of(ts))
    return np.unique(np.asarray(idxs, dtype=np.int64))


def ckdt_density(
    history: HourlySeries,
    temps: HourlySeries,
    target_time: datetime,
    forecast_temp: float,
    params: KernelParams,
) -> DensityEstimate:
    """Temperature-conditional density over the previous-year day windows."""
    if params.h_t is None:
        raise InvalidConfig("temperature-conditional density requires h_t")
    if temps.start != history.start or len(temps) < len(history):
        raise InvalidConfig("temperature series must align with the load history")
    idx = _ckdt_window_indices(history, target_time)
    if idx.size == 0:
        raise EmptyWindow(f"no previous-year observations around {target_time}")
    z = (temps.values[idx] - float(forecast_temp)) / params.h_t
    return DensityEstimate(history.values[idx], _normalized_exp(-0.5 * z * z), params.h_x)


# ---------------------------------------------------------------------------
# quantile extraction

_FAR_SIGMAS = 8.3  # ndtr(-8.3) ~ 5e-17: beyond this a component is 0 or 1
_MAX_INVERT_ITER = 240


def _range_cdf(c: np.ndarray, w: np.ndarray, cw: np.ndarray, h: float, x: np.ndarray) -> np.ndarray:
    """Mixture CDF at each point of x, touching only nearby components.

    Components more than 8.3 bandwidths below an evaluation point contribute
    their full mass, components above contribute nothing (both to ~5e-17),
    so only the contiguous index range within that radius needs the kernel.
    """
    radius = _FAR_SIGMAS * h
    j0 = np.searchsorted(c, x - radius, side="left").astype(np.int64)
    j1 = np.searchsorted(c, x + radius, side="right").astype(np.int64)
    counts = j1 - j0
    m = x.size
    starts = np.zeros(m, dtype=np.int64)
    np.cumsum(counts[:-1], out=starts[1:])
    n_flat = int(counts.sum())
    out = np.where(j0 > 0, cw[np.maximum(j0 - 1, 0)], 0.0)
    if n_flat:
        flat = np.repeat(j0 - starts, counts) + np.arange(n_flat, dtype=np.int64)
        z = (np.repeat(x, counts) - c[flat]) / h
        vals = ndtr(z)
        vals *= w[flat]
        vals = np.append(vals, 0.0)
        sums = np.add.reduceat(vals, np.minimum(starts, n_flat - 1))
        out = out + np.where(counts > 0, sums, 0.0)
    return out


def _mixture_quantiles(c: np.ndarray, w: np.ndarray, h: float, qs: np.ndarray, tol: float) -> np.ndarray:
    """Invert the sorted-mixture CDF at each level in qs.

    Brackets start at weighted order statistics padded by a few bandwidths;
    iteration is bracketed secant with a bisection step whenever an endpoint
    sticks, so convergence is unconditional. Converged levels drop out of
    the evaluation set immediately.
    """
    n = c.size
    m = qs.size
    cw = np.cumsum(w)
    total = cw[-1]

    # initial brackets: order statistics 4% of mass out on each side, padded
    # so the CDF there provably straddles the level (checked below anyway)
    margin = 0.04
    k_lo = np.maximum(2.5, -ndtri(0.45 * qs))
    k_hi = np.maximum(2.5, -ndtri(0.45 * (1.0 - qs)))
    a_idx = np.minimum(np.searchsorted(cw, np.maximum(qs - margin, 0.0) * total), n - 1)
    b_idx = np.minimum(np.searchsorted(cw, np.minimum(qs + margin, 1.0) * total), n - 1)
    lo = c[a_idx] - k_lo * h
    hi = c[b_idx] + k_hi * h
    flo = _range_cdf(c, w, cw, h, lo)
    fhi = _range_cdf(c, w, cw, h, hi)

    x_out = np.empty(m)
    done = np.zeros(m, dtype=bool)
    bad = (flo > qs) | (fhi < qs)
    if np.any(bad):
        for k in np.flatnonzero(bad):
            x_out[k] = _quantile_bisect_full(c, w, h, float(qs[k]), tol)
        done[bad] = True

    tol_inner = 0.6 * tol
    active = np.flatnonzero(~done)
    lo, hi, flo, fhi = lo[active], hi[active], flo[active], fhi[active]
    q_act = qs[active]
    side = np.zeros(active.size, dtype=np.int64)

    for _ in range(_MAX_INVERT_ITER):
        if active.size == 0:
            break
        width = hi - lo
        denom = fhi - flo
        with np.errstate(divide="ignore", invalid="ignore"):
            secant = lo + (q_act - flo) * width / denom
        force_mid = ~np.isfinite(secant) | (np.abs(side) >= 2)
        cand = np.where(
            force_mid,
            0.5 * (lo + hi),
            np.clip(secant, lo + 0.05 * width, hi - 0.05 * width),
        )
        fc = _range_cdf(c, w, cw, h, cand)
        hit = np.abs(fc - q_act) <= tol_inner
        x_out[active[hit]] = cand[hit]
        done[active[hit]] = True

        go_lo = fc <= q_act
        lo = np.where(go_lo, cand, lo)
        flo = np.where(go_lo, fc, flo)
        hi = np.where(go_lo, hi, cand)
        fhi = np.where(go_lo, fhi, fc)
        side = np.where(force_mid, 0, side)
        side = np.where(go_lo, np.maximum(side, 0) + 1, np.minimum(side, 0) - 1)

        if np.any(hit):
            keep = ~hit
            active = active[keep]
            lo, hi, flo, fhi = lo[keep], hi[keep], flo[keep], fhi[keep]
            q_act = qs[active]
            side = side[keep]
    if active.size:
        raise BracketFailure(
            f"quantile inversion did not reach tolerance {tol} for {active.size} levels"
        )
    return x_out


def _quantile_bisect_full(c: np.ndarray, w: np.ndarray, h: float, q: float, tol: float) -> float:
    """Plain bisection against the full mixture; defensive slow path."""
    lo = float(c[0] - 12.0 * h)
    hi = float(c[-1] + 12.0 * h)

    def cdf(x: float) -> float:
        return float(ndtr((x - c) / h) @ w)

    if cdf(lo) > q or cdf(hi) < q:
        raise BracketFailure(f"level {q} cannot be bracketed")
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        f = cdf(mid)
        if abs(f - q) <= 0.5 * tol:
            return mid
        if f < q:
            lo = mid
        else:
            hi = mid
    raise BracketFailure(f"bisection stalled for level {q}")


def density_quantiles(density: DensityEstimate, quantiles, tol: float = 1e-10) -> np.ndarray:
    """Invert the mixture CDF at strictly increasing levels in (0, 1).

    Each returned x satisfies |CDF(x) - q| <= tol; the output vector is
    nondecreasing.
    """
    qs = np.asarray(quantiles, dtype=np.float64).ravel()
    if qs.size < 1:
        raise InvalidConfig("need at least one quantile level")
    if np.any(qs <= 0.0) or np.any(qs >= 1.0):
        raise InvalidConfig("quantile levels must lie strictly inside (0, 1)")
    if np.any(np.diff(qs) <= 0.0):
        raise InvalidConfig("quantile levels must be strictly increasing")
    if tol <= 0:
        raise InvalidConfig("tol must be positive")

    order = np.argsort(density.centers, kind="stable")
    c = density.centers[order]
    w = density.weights[order]
    # evaluation-only prune: total dropped mass <= tol/1000
    keep = w > (tol * 1e-3) / w.size
    if not np.all(keep):
        c = c[keep]
        w = w[keep]
    out = _mixture_quantiles(c, w, density.bandwidth, qs, tol)
    return np.maximum.accumulate(out)


# ---------------------------------------------------------------------------
# forecast assembly


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidConfig(msg)


def forecast_kernel(
    method: str,
    history: HourlySeries,
    horizon_start: datetime,
    horizon_hours: int,
    params: KernelParams,
    temps: Optional[HourlySeries] = None,
    temp_forecast: Optional[HourlySeries] = None,
    circular_week: bool = False,
    quantile_tol: float = 1e-10,
    workers: int = 1,
) -> QuantileForecast:
    """One density per horizon hour, 99 quantiles per density.

    Hours are independent; `workers` > 1 extracts them in a thread pool and
    assembles rows in horizon order.
    """
    _require(method in KERNEL_METHODS, f"unknown kernel method {method!r}")
    _require(horizon_hours >= 1, "horizon_hours must be >= 1")
    if method == CKD_W:
        _require(params.h_w is not None, "ckd-w requires h_w")
    if method == CKD_T:
        _require(params.h_t is not None, "ckd-t requires h_t")
        _require(temps is not None, "ckd-t requires a temperature history")
        _require(temp_forecast is not None, "ckd-t requires a temperature forecast")
        if temp_forecast.start != horizon_start or len(temp_forecast) < horizon_hours:
            raise InvalidConfig("temperature forecast must cover the horizon")

    work = history
    if method == CKD_W and history.start < CKDW_HISTORY_EPOCH <= history.end:
        work = history.window(
            CKDW_HISTORY_EPOCH, len(history) - history.index_of(CKDW_HISTORY_EPOCH)
        )
    pow_, doy, ylen = calendar_arrays(work.start, len(work))
    values = work.values
    log_lam = math.log(params.lam)
    decay_cache: dict[int, np.ndarray] = {}

    def decay_for(day_of_year: int) -> np.ndarray:
        alpha = decay_cache.get(day_of_year)
        if alpha is None:
            alpha = _decay_exponents(day_of_year, doy, ylen)
            decay_cache[day_of_year] = alpha
        return alpha

    def one_hour(i: int) -> np.ndarray:
        ts = horizon_start + i * ONE_HOUR
        st = stamp_of(ts)
        if method == KDE_W:
            idx = np.flatnonzero(pow_ == st.period_of_week)
            if idx.size == 0:
                raise NoMatchingPeriod(f"no observation at weekly period {st.period_of_week}")
            dens = DensityEstimate(
                values[idx], _normalized_exp(decay_for(st.day_of_year)[idx] * log_lam), params.h_x
            )
        elif method == CKD_W:
            delta = pow_.astype(np.float64) - float(st.period_of_week)
            if circular_week:
                a = np.abs(delta)
                delta = np.minimum(a, 168.0 - a)
            logw = decay_for(st.day_of_year) * log_lam - 0.5 * (delta / params.h_w) ** 2
            dens = DensityEstimate(values, _normalized_exp(logw), params.h_x)
        else:
            dens = ckdt_density(
                history, temps, ts, float(temp_forecast.values[i]), params
            )
        return density_quantiles(dens, QUANTILE_LEVELS, tol=quantile_tol)

    rows = np.empty((horizon_hours, 99))
    if workers > 1 and horizon_hours > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, row in enumerate(pool.map(one_hour, range(horizon_hours))):
                rows[i] = row
    else:
        for i in range(horizon_hours):
            rows[i] = one_hour(i)
    return QuantileForecast(horizon_start, rows)


# ---------------------------------------------------------------------------
# cross-validation


@dataclass(frozen=True)
class CVPoint:
    lam: float
    params: KernelParams
    loss: float


@dataclass(frozen=True)
class CVResult:
    params: KernelParams
    grid: tuple[CVPoint, ...]


def cross_validate_kernel(
    method: str,
    history: HourlySeries,
    validation_start: datetime,
    validation_hours: int,
    lambda_grid: Optional[Sequence[float]] = None,
    temps: Optional[HourlySeries] = None,
    bounded: bool = False,
    quantile_tol: float = 1e-6,
    scalar_tol: Optional[float] = None,
    nm_tol: float = 0.05,
    nm_max_iterations: int = 60,
    circular_week: bool = False,
) -> CVResult:
    """Pick (lambda, bandwidths) minimizing mean pinball on a held-out window.

    Training data is everything before the window. Bandwidths are tuned per
    lambda: a bounded scalar search for the week-period method's h_x, a
    Nelder-Mead over log bandwidths for the conditional methods (clamped to
    the raw bounds instead when `bounded` is set). Ties prefer the smaller
    lambda. Validation quantiles use a looser inversion tolerance than final
    forecasts; the ranking is insensitive to it.
    """
    from .evaluation import mean_pinball

    _require(method in KERNEL_METHODS, f"unknown kernel method {method!r}")
    if validation_hours < 1:
        raise WindowOutsideHistory("validation window must contain at least one hour")
    try:
        first = history.index_of(validation_start)
        history.timestamp(first + validation_hours - 1)
    except Exception as exc:
        raise WindowOutsideHistory(str(exc)) from exc
    if first == 0:
        raise WindowOutsideHistory("no training data before the validation window")

    train = history.prefix(validation_start)
    actual = history.window(validation_start, validation_hours).values
    sigma = max(float(np.std(train.values)), 1e-9)
    hx_lo, hx_hi = 1e-3 * sigma, 10.0 * sigma
    hw_lo, hw_hi = 0.1, 500.0
    ht_lo, ht_hi = 0.1, 50.0
    hx0 = min(max(1.06 * sigma * len(train) ** -0.2, hx_lo), hx_hi)

    temps_window = None
    if method == CKD_T:
        _require(temps is not None, "ckd-t cross-validation requires temperatures")
        temps_window = HourlySeries(
            validation_start,
            temps.window(validation_start, validation_hours).values,
            unit="temperature",
        )

    def window_loss(p: KernelParams) -> float:
        fc = forecast_kernel(
            method,
            train,
            validation_start,
            validation_hours,
            p,
            temps=temps,
            temp_forecast=temps_window,
            circular_week=circular_week,
            quantile_tol=quantile_tol,
        )
        return mean_pinball(fc.values, actual)

    grid_points: list[CVPoint] = []
    lams = [1.0] if method == CKD_T else [float(v) for v in (lambda_grid or DEFAULT_LAMBDA_GRID)]
    for lam in lams:
        if method == KDE_W:
            res = minimize_bounded_scalar(
                ScalarObjective(
                    lambda hx, _l=lam: window_loss(KernelParams(h_x=hx, lam=_l)),
                    hx_lo,
                    hx_hi,
                ),
                tol=scalar_tol if scalar_tol is not None else 1e-2 * sigma,
            )
            best = KernelParams(h_x=res.x, lam=lam)
            loss = res.value
        else:
            second0 = 5.0 if method == CKD_W else 3.0
            second_bounds = (hw_lo, hw_hi) if method == CKD_W else (ht_lo, ht_hi)

            def make(hx: float, hsecond: float, _l=lam) -> KernelParams:
                if method == CKD_W:
                    return KernelParams(h_x=hx, lam=_l, h_w=hsecond)
                return KernelParams(h_x=hx, lam=_l, h_t=hsecond)

            obj = VectorObjective(
                lambda v: window_loss(make(v[0], v[1])),
                dimension=2,
                bounds=[(hx_lo, hx_hi), second_bounds],
            )
            res = minimize_nelder_mead(
                obj,
                start=[hx0, second0],
                tol=nm_tol,
                bound_mode="clamp" if bounded else "log",
                max_iterations=nm_max_iterations,
            )
            x = np.clip(res.x, [hx_lo, second_bounds[0]], [hx_hi, second_bounds[1]])
            best = make(float(x[0]), float(x[1]))
            loss = res.value
        grid_points.append(CVPoint(lam=lam, params=best, loss=float(loss)))

    winner = grid_points[0]
    for pt in grid_points[1:]:
        if pt.loss < winner.loss:
            winner = pt
    return CVResult(params=winner.params, grid=tuple(grid_points))
