"""Calendar stamps, series containers, ingestion and the synthetic generator."""
from datetime import datetime, timedelta

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from loadquant import (
    CalendarStamp,
    HourlySeries,
    StationTable,
    SynthConfig,
    calendar_arrays,
    generate_synthetic,
    ingest_load_csv,
    ingest_temperature_csv,
    mean_temperature,
    stamp,
    stamp_of,
    write_load_csv,
    write_temperature_csv,
)
from loadquant.errors import (
    EmptyFile,
    GapTooLarge,
    IndexOutOfRange,
    InvalidConfig,
    MalformedRow,
    WrongColumnCount,
)
from loadquant.synth import ANNUAL_PHASE, DAILY_PHASE, DAYS_PER_YEAR, TEMP_ANNUAL_PHASE, TEMP_DIURNAL_PHASE, WEEKLY_PHASE


def series(start, values, unit="load"):
    return HourlySeries(start, np.asarray(values, dtype=float), unit)


class TestCalendarStamp:
    def test_data_start_anchor(self):
        s = stamp_of(datetime(2005, 1, 1, 0))
        assert s.day_of_year == 1
        assert s.year_length == 365
        assert s.hour_of_day == 1

    def test_leap_day(self):
        s = stamp_of(datetime(2008, 2, 28, 23) + timedelta(hours=1))
        assert s.day_of_year == 60
        assert s.year_length == 366

    def test_last_hour_of_year(self):
        h = series(datetime(2005, 1, 1), np.zeros(8760))
        s = stamp(h, 8759)
        assert s.day_of_year == 365
        assert s.hour_of_day == 24

    def test_index_out_of_range(self):
        h = series(datetime(2005, 1, 1), [1.0, 2.0])
        with pytest.raises(IndexOutOfRange):
            stamp(h, 2)

    def test_invariant_validation(self):
        with pytest.raises(ValueError):
            CalendarStamp(day_of_week=1, hour_of_day=1, period_of_week=2,
                          day_of_year=1, year_length=365)
        with pytest.raises(ValueError):
            CalendarStamp(day_of_week=1, hour_of_day=1, period_of_week=1,
                          day_of_year=366, year_length=365)

    def test_four_year_walk_consistency(self):
        # period advances by 1 mod 168 each hour; day-of-year resets at new year
        start = datetime(2008, 1, 1)
        n = 24 * (366 + 365 + 365 + 365)
        pow_, doy, ylen = calendar_arrays(start, n)
        assert pow_[0] == stamp_of(start).period_of_week
        assert np.all((pow_[1:] - pow_[:-1]) % 168 == 1)
        resets = np.flatnonzero(np.diff(doy) < 0)
        assert len(resets) == 3
        for r in resets:
            assert doy[r + 1] == 1
        # spot-check against the scalar path
        rng = np.random.default_rng(0)
        for i in rng.integers(0, n, size=200):
            s = stamp_of(start + timedelta(hours=int(i)))
            assert s.period_of_week == pow_[i]
            assert s.day_of_year == doy[i]
            assert s.year_length == ylen[i]


class TestHourlySeries:
    def test_basic_invariants(self):
        with pytest.raises(ValueError):
            series(datetime(2010, 1, 1), [])
        with pytest.raises(ValueError):
            series(datetime(2010, 1, 1), [np.nan])
        with pytest.raises(ValueError):
            series(datetime(2010, 1, 1, 0, 30), [1.0])

    def test_window_prefix(self):
        h = series(datetime(2010, 1, 1), np.arange(48.0))
        w = h.window(datetime(2010, 1, 1, 5), 3)
        assert list(w.values) == [5.0, 6.0, 7.0]
        p = h.prefix(datetime(2010, 1, 2))
        assert len(p) == 24

    def test_values_read_only(self):
        h = series(datetime(2010, 1, 1), [1.0, 2.0])
        with pytest.raises(ValueError):
            h.values[0] = 9.0


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestLoadIngestion:
    def test_identity(self, tmp_path):
        f = tmp_path / "load.csv"
        write_lines(f, ["timestamp,load",
                        "2010-01-01T00:00,1",
                        "2010-01-01T01:00,2",
                        "2010-01-01T02:00,3"])
        s = ingest_load_csv(f)
        assert list(s.values) == [1.0, 2.0, 3.0]
        assert s.start == datetime(2010, 1, 1)

    def test_linear_interpolation(self, tmp_path):
        f = tmp_path / "load.csv"
        write_lines(f, ["timestamp,load",
                        "2010-01-01T00:00,1",
                        "2010-01-01T03:00,4"])
        s = ingest_load_csv(f)
        assert list(s.values) == [1.0, 2.0, 3.0, 4.0]

    def test_gap_too_large(self, tmp_path):
        f = tmp_path / "load.csv"
        write_lines(f, ["timestamp,load",
                        "2010-01-01T00:00,1",
                        "2010-01-01T10:00,2"])
        with pytest.raises(GapTooLarge):
            ingest_load_csv(f)

    def test_six_hour_gap_repaired(self, tmp_path):
        f = tmp_path / "load.csv"
        write_lines(f, ["timestamp,load",
                        "2010-01-01T00:00,0",
                        "2010-01-01T07:00,7"])
        s = ingest_load_csv(f)
        assert list(s.values) == [0, 1, 2, 3, 4, 5, 6, 7]

    def test_malformed_rows(self, tmp_path):
        f = tmp_path / "load.csv"
        write_lines(f, ["timestamp,load", "2010-01-01T00:61,1"])
        with pytest.raises(MalformedRow):
            ingest_load_csv(f)
        write_lines(f, ["timestamp,load", "2010-01-01T00:00,abc"])
        with pytest.raises(MalformedRow):
            ingest_load_csv(f)
        write_lines(f, ["timestamp,load",
                        "2010-01-01T01:00,1",
                        "2010-01-01T00:00,2"])
        with pytest.raises(MalformedRow):
            ingest_load_csv(f)

    def test_empty_file(self, tmp_path):
        f = tmp_path / "load.csv"
        f.write_text("", encoding="utf-8")
        with pytest.raises(EmptyFile):
            ingest_load_csv(f)
        write_lines(f, ["timestamp,load"])
        with pytest.raises(EmptyFile):
            ingest_load_csv(f)

    def test_round_trip_full_precision(self, tmp_path):
        data = generate_synthetic(SynthConfig(years=2), seed=5)
        sub = data.load.window(data.load.start, 200)
        f = tmp_path / "roundtrip.csv"
        write_load_csv(sub, f)
        back = ingest_load_csv(f)
        assert back.start == sub.start
        np.testing.assert_allclose(back.values, sub.values, rtol=0, atol=1e-12)

    @given(st.lists(st.integers(min_value=1, max_value=7), min_size=1, max_size=6))
    @settings(max_examples=40, deadline=None)
    def test_interpolation_linearity(self, gaps):
        # interpolated points lie on the straight line through bracketing rows
        from loadquant.dataio import _repair_gaps

        rng = np.random.default_rng(sum(gaps))
        times = [datetime(2011, 5, 1)]
        for g in gaps:
            times.append(times[-1] + timedelta(hours=g))
        vals = rng.uniform(-100, 100, (len(times), 1))
        full = _repair_gaps(times, vals)
        for (t0, v0), (t1, v1) in zip(zip(times, vals[:, 0]), zip(times[1:], vals[1:, 0])):
            span = int((t1 - t0).total_seconds()) // 3600
            base = int((t0 - times[0]).total_seconds()) // 3600
            for j in range(span + 1):
                expect = v0 + (v1 - v0) * j / span
                assert full[base + j, 0] == pytest.approx(expect, abs=1e-9)


class TestTemperatureIngestion:
    def test_identity_25_stations(self, tmp_path):
        f = tmp_path / "t.csv"
        header = "timestamp," + ",".join(f"w{i}" for i in range(1, 26))
        row = ",".join(["50.0"] * 25)
        write_lines(f, [header,
                        f"2010-01-01T00:00,{row}",
                        f"2010-01-01T01:00,{row}"])
        t = ingest_temperature_csv(f)
        assert t.stations.shape == (2, 25)
        assert np.all(t.stations == 50.0)

    def test_wrong_column_count(self, tmp_path):
        f = tmp_path / "t.csv"
        header = "timestamp," + ",".join(f"w{i}" for i in range(1, 26))
        write_lines(f, [header, "2010-01-01T00:00," + ",".join(["1"] * 24)])
        with pytest.raises(WrongColumnCount):
            ingest_temperature_csv(f)

    def test_mean_with_one_cold_station(self, tmp_path):
        f = tmp_path / "t.csv"
        header = "timestamp," + ",".join(f"w{i}" for i in range(1, 26))
        row = "30.0," + ",".join(["70.0"] * 24)
        write_lines(f, [header, f"2010-01-01T00:00,{row}"])
        t = ingest_temperature_csv(f)
        m = mean_temperature(t)
        # (30 + 24*70)/25
        assert m.values[0] == pytest.approx(68.4, abs=1e-12)

    def test_temperature_round_trip(self, tmp_path):
        data = generate_synthetic(SynthConfig(years=2), seed=9)
        sub = StationTable(data.temps.start, data.temps.stations[:50])
        f = tmp_path / "t.csv"
        write_temperature_csv(sub, f)
        back = ingest_temperature_csv(f)
        np.testing.assert_allclose(back.stations, sub.stations, rtol=0, atol=1e-12)


class TestMeanTemperature:
    def test_constant(self):
        t = StationTable(datetime(2010, 1, 1), np.full((4, 25), 60.0))
        assert np.all(mean_temperature(t).values == 60.0)

    def test_one_to_twentyfive(self):
        t = StationTable(datetime(2010, 1, 1), np.arange(1.0, 26.0)[None, :])
        assert mean_temperature(t).values[0] == pytest.approx(13.0)

    def test_matches_row_mean_oracle(self):
        rng = np.random.default_rng(11)
        arr = rng.uniform(-20, 110, (60, 25))
        t = StationTable(datetime(2010, 1, 1), arr)
        m = mean_temperature(t)
        for i in range(60):
            assert m.values[i] == pytest.approx(sum(arr[i]) / 25.0, rel=1e-12)


class TestSyntheticGenerator:
    def test_determinism(self):
        a = generate_synthetic(SynthConfig(years=2), seed=42)
        b = generate_synthetic(SynthConfig(years=2), seed=42)
        assert np.array_equal(a.load.values, b.load.values)
        assert np.array_equal(a.temps.stations, b.temps.stations)

    def test_seeds_differ(self):
        a = generate_synthetic(SynthConfig(years=2), seed=1)
        b = generate_synthetic(SynthConfig(years=2), seed=2)
        assert not np.array_equal(a.load.values, b.load.values)

    def test_invalid_config(self):
        with pytest.raises(InvalidConfig):
            SynthConfig(years=1)
        with pytest.raises(InvalidConfig):
            SynthConfig(load_noise_sd=-1.0)

    def test_leap_row_counts(self):
        assert len(generate_synthetic(SynthConfig(years=2, start_year=2008), 0).load) == 17544
        assert len(generate_synthetic(SynthConfig(years=2, start_year=2009), 0).load) == 17520

    def test_zero_noise_closed_form(self):
        cfg = SynthConfig(years=2, load_noise_sd=0.0, temp_noise_sd=0.0,
                          station_offset_sd=0.0)
        data = generate_synthetic(cfg, seed=3)
        p = data.params
        n = len(data.load)
        t = np.arange(n, dtype=float)
        hod = t % 24
        day = t / 24
        pow0 = stamp_of(data.load.start).period_of_week
        pw = (pow0 - 1 + np.arange(n)) % 168 + 1
        temp = (p["temp_mean"]
                + p["temp_annual_amplitude"] * np.sin(2 * np.pi * (day + TEMP_ANNUAL_PHASE) / DAYS_PER_YEAR)
                + p["temp_diurnal_amplitude"] * np.sin(2 * np.pi * (hod + TEMP_DIURNAL_PHASE) / 24))
        expected = (p["base_load"]
                    + p["trend_per_hour"] * t
                    + p["daily_amplitude"] * np.sin(2 * np.pi * (hod + DAILY_PHASE) / 24)
                    + p["weekly_amplitude"] * np.sin(2 * np.pi * (pw + WEEKLY_PHASE) / 168)
                    + p["annual_amplitude"] * np.sin(2 * np.pi * (day + ANNUAL_PHASE) / DAYS_PER_YEAR)
                    + p["heating_coef"] * np.clip(p["heating_ref"] - temp, 0, None)
                    + p["cooling_coef"] * np.clip(temp - p["cooling_ref"], 0, None))
        np.testing.assert_allclose(data.load.values, expected, rtol=0, atol=1e-9)
        np.testing.assert_allclose(
            data.temps.stations, np.broadcast_to(temp[:, None], (n, 25)), rtol=0, atol=1e-9
        )
