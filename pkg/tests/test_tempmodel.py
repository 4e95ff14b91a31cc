"""Temperature design matrix, least-squares fit, iterated forecasting, MAPE."""
from datetime import datetime

import numpy as np
import pytest

from loadquant import HourlySeries, fit_temperature, forecast_temperature, mape
from loadquant.errors import InsufficientHistory, RankDeficient, ZeroActual
from loadquant.series import ONE_HOUR
from loadquant.tempmodel import (
    EPOCH,
    M_ANNUAL,
    N_COEFFS,
    N_LAGS,
    P_DIURNAL,
    PHI_DAYS,
    TemperatureModelParams,
    build_design,
    hour_index,
)


def reference_params(level=55.0, beta1=2e-4, radius=0.97):
    """Stable AR coefficients built from prescribed characteristic roots.

    Slowly decaying roots keep the lag columns excited over a few hundred
    rows, which makes the noiseless design full rank and the fit exact.
    """
    angles = np.pi * np.arange(1, 13) / 13.0
    roots = []
    for a in angles:
        roots.append(radius * np.exp(1j * a))
        roots.append(radius * np.exp(-1j * a))
    roots.append(-radius)
    poly = np.real(np.poly(roots))
    alpha = -poly[1:]
    dc_gain = 1.0 / np.polyval(poly, 1.0)
    return TemperatureModelParams(
        beta0=level / dc_gain,
        beta1=beta1,
        gamma=np.array([2.0, -1.2, 0.7, 0.35]),
        delta=np.array([1.5, 0.8, -0.45, 0.22]),
        psi=np.array([6.0, -2.5, 1.2]),
        alpha=alpha,
    )


def simulate(params, n_hours, seed=0, start=datetime(2008, 1, 1), spread=30.0):
    """Exact model recursion from a randomly perturbed 25-hour seed."""
    rng = np.random.default_rng(seed)
    seed_vals = 55.0 + rng.uniform(-spread, spread, N_LAGS)
    head = HourlySeries(start, seed_vals, unit="temperature")
    rolled = forecast_temperature(params, head, n_hours)
    return head.with_appended(rolled.values)


class TestBuildDesign:
    def test_row_layout_at_midnight(self):
        # j = 0: every diurnal sine is 0, every cosine is 1
        temps = HourlySeries(EPOCH, np.arange(60.0), unit="temperature")
        X, y = build_design(temps, 25, 26)
        row = X[0]
        assert row[0] == 1.0
        assert row[1] == 25.0  # absolute hour j, anchored at the epoch
        # row 25 has d(j) = 1; check directly against the formula instead
        X0, _ = build_design(
            HourlySeries(EPOCH, np.arange(120.0), unit="temperature"), 48, 49
        )
        d = 0.0
        sines = X0[0, 2:10:2]
        cosines = X0[0, 3:11:2]
        np.testing.assert_allclose(sines, 0.0, atol=1e-12)
        np.testing.assert_allclose(cosines, 1.0, atol=1e-12)

    def test_annual_terms_at_day_one(self):
        temps = HourlySeries(EPOCH, np.arange(120.0), unit="temperature")
        X, _ = build_design(temps, 48, 49)  # j = 48 -> f(j) = 2
        expect = [np.sin(2 * np.pi * m * (2.0 + PHI_DAYS) / 365.0) for m in (1, 2, 3)]
        np.testing.assert_allclose(X[0, 10:13], expect, atol=1e-12)

    def test_row_length(self):
        temps = HourlySeries(EPOCH, np.arange(80.0), unit="temperature")
        X, y = build_design(temps, 25, 80)
        assert X.shape == (55, N_COEFFS)
        assert N_COEFFS == 2 + 2 * P_DIURNAL + M_ANNUAL + N_LAGS == 38
        np.testing.assert_array_equal(y, np.arange(25.0, 80.0))

    def test_lag_columns(self):
        temps = HourlySeries(EPOCH, np.arange(60.0), unit="temperature")
        X, _ = build_design(temps, 25, 30)
        np.testing.assert_array_equal(X[0, 13:], np.arange(24.0, -1.0, -1.0))

    def test_diurnal_periodicity(self):
        temps = HourlySeries(EPOCH, np.arange(200.0), unit="temperature")
        X, _ = build_design(temps, 25, 150)
        np.testing.assert_allclose(X[0, 2:10], X[24, 2:10], atol=1e-9)

    def test_needs_lags(self):
        temps = HourlySeries(EPOCH, np.arange(60.0), unit="temperature")
        with pytest.raises(InsufficientHistory):
            build_design(temps, 10, 40)


class TestFit:
    def test_exact_recovery_zero_noise(self):
        params = reference_params()
        series = simulate(params, 400)
        fitted = fit_temperature(series)
        rel = np.abs(fitted.to_vector() - params.to_vector()) / np.maximum(
            np.abs(params.to_vector()), 1e-12
        )
        assert rel.max() <= 1e-6

    def test_noisy_recovery_within_sampling_error(self):
        # innovations enter the recursion; every coefficient estimate must sit
        # within 3 standard errors of the truth, per seed (fixed seeds)
        from loadquant.tempmodel import _SEAS_LEN, _seasonal_columns

        sigma = 0.5
        params = reference_params()
        vec = params.to_vector()
        seas_coef, lag_coef = vec[:_SEAS_LEN], vec[_SEAS_LEN:]
        n = 24 * 365
        start = datetime(2008, 1, 1)
        j0 = hour_index(start)
        seas = _seasonal_columns(np.arange(j0, j0 + n), params.phi) @ seas_coef

        for seed in range(20):
            rng = np.random.default_rng(1000 + seed)
            vals = np.empty(n)
            vals[:N_LAGS] = 55.0 + rng.uniform(-30, 30, N_LAGS)
            eps = rng.normal(0, sigma, n)
            for j in range(N_LAGS, n):
                vals[j] = seas[j] + np.dot(lag_coef, vals[j - N_LAGS : j][::-1]) + eps[j]
            series = HourlySeries(start, vals, unit="temperature")
            est = fit_temperature(series).to_vector()
            X, _ = build_design(series, N_LAGS, n)
            se = sigma * np.sqrt(np.diag(np.linalg.inv(X.T @ X)))
            assert np.all(np.abs(est - vec) <= 3.0 * se)

    def test_constant_series_rank_deficient(self):
        temps = HourlySeries(EPOCH, np.full(400, 50.0), unit="temperature")
        with pytest.raises(RankDeficient):
            fit_temperature(temps)

    def test_needs_enough_rows(self):
        temps = HourlySeries(EPOCH, np.arange(100.0), unit="temperature")
        with pytest.raises(InsufficientHistory):
            fit_temperature(temps)

    def test_local_optimality_of_sse(self):
        params = reference_params()
        rng = np.random.default_rng(5)
        series = simulate(params, 600)
        noisy = HourlySeries(series.start, series.values + rng.normal(0, 1, len(series)),
                             unit="temperature")
        fitted = fit_temperature(noisy)
        X, y = build_design(noisy, N_LAGS, len(noisy))
        beta = fitted.to_vector()
        sse0 = float(np.sum((y - X @ beta) ** 2))
        for j in range(N_COEFFS):
            for sign in (-1.0, 1.0):
                b = beta.copy()
                b[j] += sign * 1e-3
                assert np.sum((y - X @ b) ** 2) >= sse0 - 1e-9 * (1 + sse0)


class TestForecast:
    def test_horizon_one_equals_design_product(self):
        params = reference_params()
        series = simulate(params, 300)
        fc = forecast_temperature(params, series, 1)
        full = simulate(params, 301)
        assert fc.values[0] == pytest.approx(full.values[-1], abs=1e-9)

    def test_carry_forward_with_unit_lag(self):
        alpha = np.zeros(N_LAGS)
        alpha[0] = 1.0
        params = TemperatureModelParams(
            beta0=0.0, beta1=0.0, gamma=np.zeros(4), delta=np.zeros(4),
            psi=np.zeros(3), alpha=alpha,
        )
        hist = HourlySeries(datetime(2010, 1, 1), np.linspace(40, 45, 30),
                            unit="temperature")
        fc = forecast_temperature(params, hist, 48)
        np.testing.assert_allclose(fc.values, 45.0, atol=1e-12)

    def test_pure_seasonal_when_lags_zero(self):
        params = reference_params()
        no_lag = TemperatureModelParams(
            beta0=50.0, beta1=1e-4, gamma=params.gamma, delta=params.delta,
            psi=params.psi, alpha=np.zeros(N_LAGS),
        )
        hist = HourlySeries(datetime(2010, 1, 1), np.full(30, 60.0), unit="temperature")
        fc = forecast_temperature(no_lag, hist, 3)
        from loadquant.tempmodel import _seasonal_columns, _SEAS_LEN

        j0 = hour_index(hist.end + ONE_HOUR)
        seas = _seasonal_columns(np.arange(j0, j0 + 3), no_lag.phi)
        expect = seas @ no_lag.to_vector()[:_SEAS_LEN]
        np.testing.assert_allclose(fc.values, expect, atol=1e-12)

    def test_rechunking_invariance(self):
        params = reference_params()
        hist = simulate(params, 300, seed=3)
        once = forecast_temperature(params, hist, 48)
        first = forecast_temperature(params, hist, 24)
        second = forecast_temperature(params, hist.with_appended(first.values), 24)
        np.testing.assert_array_equal(once.values[:24], first.values)
        np.testing.assert_array_equal(once.values[24:], second.values)

    def test_self_consistency_mape(self):
        params = reference_params()
        full = simulate(params, 424)
        hist = HourlySeries(full.start, full.values[:400], unit="temperature")
        fc = forecast_temperature(fit_temperature(hist), hist, 24)
        actual = HourlySeries(fc.start, full.values[400:424], unit="temperature")
        assert mape(actual, fc) < 0.1


class TestMape:
    def test_identical(self):
        a = HourlySeries(datetime(2010, 1, 1), [50.0, 60.0], unit="temperature")
        assert mape(a, a) == 0.0

    def test_single_value(self):
        a = HourlySeries(datetime(2010, 1, 1), [100.0])
        p = HourlySeries(datetime(2010, 1, 1), [90.0])
        assert mape(a, p) == pytest.approx(10.0)

    def test_two_values_hand_computed(self):
        a = HourlySeries(datetime(2010, 1, 1), [50.0, 100.0])
        p = HourlySeries(datetime(2010, 1, 1), [55.0, 90.0])
        assert mape(a, p) == pytest.approx(10.0)

    def test_zero_actual(self):
        a = HourlySeries(datetime(2010, 1, 1), [0.0, 1.0])
        p = HourlySeries(datetime(2010, 1, 1), [1.0, 1.0])
        with pytest.raises(ZeroActual):
            mape(a, p)
