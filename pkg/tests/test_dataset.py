import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nextlf.dataset import (
    Channel,
    NoiseSpec,
    TimeSeriesSet,
    add_noise,
    detrend,
    load_timeseries_csv,
    write_timeseries_csv,
)

from conftest import make_ts


class TestTimeSeriesSet:
    def test_basic_properties(self):
        ts = make_ts([[0, 1, 0], [1, 2, 3]], fs=2.0)
        assert ts.n_channels == 2
        assert ts.n_samples == 3
        assert ts.dt == 0.5
        np.testing.assert_allclose(ts.time, [0, 0.5, 1.0])
        assert ts.names == ["c0", "c1"]

    def test_samples_are_read_only(self):
        ts = make_ts([[0, 1, 0]])
        with pytest.raises(ValueError):
            ts.samples[0, 0] = 5.0

    @pytest.mark.parametrize("fs", [0.0, -1.0])
    def test_rejects_bad_fs(self, fs):
        with pytest.raises(ValueError, match="sampling frequency"):
            make_ts([[0, 1, 0]], fs=fs)

    def test_rejects_single_sample(self):
        with pytest.raises(ValueError):
            make_ts([[1.0]])

    def test_rejects_duplicate_names(self):
        with pytest.raises(ValueError, match="unique"):
            make_ts([[0, 1], [1, 2]], names=["a", "a"])

    def test_rejects_channel_count_mismatch(self):
        with pytest.raises(ValueError):
            TimeSeriesSet(1.0, (Channel("a"),), np.zeros((2, 4)))

    def test_no_channels(self):
        with pytest.raises(ValueError, match="no channels"):
            TimeSeriesSet(1.0, (), np.zeros((0, 4)))


class TestCsv:
    def test_three_row_file(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("t,a\n0,0\n0.5,1\n1.0,0\n")
        ts = load_timeseries_csv(p)
        assert ts.fs == pytest.approx(2.0)
        assert ts.names == ["a"]
        np.testing.assert_array_equal(ts.samples, [[0, 1, 0]])

    def test_non_uniform_grid(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("t,a\n0,0\n0.1,1\n0.25,0\n")
        with pytest.raises(ValueError, match="non-uniform time grid") as exc:
            load_timeseries_csv(p)
        assert "jitter" in str(exc.value)

    def test_ragged_row_reports_index(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("t,a,b\n0,0,1\n1,1\n")
        with pytest.raises(ValueError, match="row 2"):
            load_timeseries_csv(p)

    def test_non_numeric_cell_reports_coordinates(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("t,a\n0,0\n1,abc\n2,0\n")
        with pytest.raises(ValueError, match="abc") as exc:
            load_timeseries_csv(p)
        assert "row 2, column 1" in str(exc.value)

    def test_missing_file_is_os_error(self, tmp_path):
        with pytest.raises(OSError, match="missing.csv"):
            load_timeseries_csv(tmp_path / "missing.csv")

    def test_write_rows(self, tmp_path):
        p = tmp_path / "w.csv"
        write_timeseries_csv(make_ts([[0, 1, 0]], fs=2.0, names=["a"]), p)
        lines = p.read_text().splitlines()
        assert lines[0] == "t,a"
        assert [float(r.split(",")[0]) for r in lines[1:]] == [0.0, 0.5, 1.0]

    def test_write_to_bad_path(self, tmp_path):
        with pytest.raises(OSError, match="nodir"):
            write_timeseries_csv(make_ts([[0, 1]]), tmp_path / "nodir" / "x.csv")

    @settings(max_examples=25, deadline=None)
    @given(
        arrays(np.float64, (2, 17), elements=st.floats(-1e6, 1e6, allow_nan=False)),
        st.sampled_from([1.0, 100.0, 1800.0, 3.7]),
    )
    def test_round_trip(self, tmp_path_factory, samples, fs):
        p = tmp_path_factory.mktemp("rt") / "x.csv"
        ts = make_ts(samples, fs=fs)
        write_timeseries_csv(ts, p)
        back = load_timeseries_csv(p)
        assert back.fs == pytest.approx(fs, rel=1e-12)
        np.testing.assert_allclose(back.samples, ts.samples, rtol=1e-12, atol=0)
        assert back.names == ts.names


class TestDetrend:
    def test_constant(self):
        np.testing.assert_array_equal(detrend(make_ts([[5, 5, 5]])).samples, [[0, 0, 0]])

    def test_mean_removal(self):
        np.testing.assert_allclose(detrend(make_ts([[1, 2, 3]])).samples, [[-1, 0, 1]])

    def test_zero_mean_unchanged(self):
        x = np.array([[1.0, -1.0, 2.0, -2.0]])
        np.testing.assert_allclose(detrend(make_ts(x)).samples, x, atol=1e-15)

    def test_metadata_kept(self):
        ts = make_ts([[1, 2, 3]], fs=7.0, names=["q"])
        out = detrend(ts)
        assert out.fs == 7.0 and out.names == ["q"]

    @given(arrays(np.float64, (3, 20), elements=st.floats(-1e3, 1e3, allow_nan=False)))
    def test_idempotent(self, x):
        once = detrend(make_ts(x))
        twice = detrend(once)
        np.testing.assert_allclose(twice.samples, once.samples, atol=1e-12)


class TestNoise:
    def test_zero_level_is_identity(self):
        ts = make_ts(np.random.default_rng(0).standard_normal((2, 50)))
        assert add_noise(ts, NoiseSpec(0.0)) is ts

    def test_deterministic(self):
        ts = make_ts(np.random.default_rng(0).standard_normal((2, 50)))
        a = add_noise(ts, NoiseSpec(0.01, seed=4))
        b = add_noise(ts, NoiseSpec(0.01, seed=4))
        np.testing.assert_array_equal(a.samples, b.samples)
        c = add_noise(ts, NoiseSpec(0.01, seed=5))
        assert not np.array_equal(a.samples, c.samples)

    def test_gaussian_std(self):
        x = 3.0 * np.random.default_rng(1).standard_normal((1, 10**6))
        ts = make_ts(x)
        out = add_noise(ts, NoiseSpec(0.01, seed=2))
        sigma = np.std(x, ddof=1)
        assert np.std(out.samples - x) == pytest.approx(0.01 * sigma, rel=0.02)

    def test_uniform_is_non_negative_offset(self):
        ts = make_ts(np.random.default_rng(1).standard_normal((1, 1000)))
        out = add_noise(ts, NoiseSpec(0.5, seed=0, distribution="uniform"))
        d = out.samples - ts.samples
        assert d.min() >= 0
        assert d.max() < 0.5 * np.std(ts.samples, ddof=1)

    @pytest.mark.parametrize("kw", [{"level": -0.1}, {"level": 0.1, "distribution": "cauchy"}])
    def test_invalid_spec(self, kw):
        with pytest.raises(ValueError):
            NoiseSpec(**kw)
