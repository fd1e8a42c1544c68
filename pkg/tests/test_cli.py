import json
from pathlib import Path

import numpy as np
import pytest

from nextlf import report as rp
from nextlf.cli import main, parse_band, sidecar_path

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

FRAME = {
    "model": "shear_frame",
    "masses": [1.0, 1.5, 1.0],
    "stiffnesses": [400.0, 300.0, 200.0],
    "zeta": 0.02,
    "force": {"kind": "impulse", "dof": 2},
    "fs": 50.0,
    "duration": 40.0,
}
FAST_ARGS = ["--normalization", "biased", "--orders", "4:2:30"]


def write_config(path, **changes):
    path.write_text(json.dumps({**FRAME, **changes}))
    return path


@pytest.fixture
def frame_csv(tmp_path):
    cfg = write_config(tmp_path / "frame.json")
    out = tmp_path / "frame.csv"
    assert main(["simulate", str(cfg), "--out", str(out)]) == 0
    return out


def run_identify(csv, out, *extra):
    return main(["identify", str(csv), "--out", str(out), *FAST_ARGS, *extra])


class TestSimulate:
    def test_writes_csv_and_sidecar(self, frame_csv):
        lines = frame_csv.read_text().splitlines()
        assert lines[0] == "t,floor1,floor2,floor3"
        assert len(lines) == 2001
        side = rp.read_json(sidecar_path(frame_csv))
        assert side["kind"] == "baseline"
        assert len(side["modal_set"]["modes"]) == 3

    def test_noise_is_reproducible(self, tmp_path):
        cfg = write_config(tmp_path / "f.json")
        outs = [tmp_path / f"n{i}.csv" for i in range(3)]
        for out, seed in zip(outs, ["3", "3", "4"]):
            assert main(["simulate", str(cfg), "--noise", "0.005", "--seed", seed, "--out", str(out)]) == 0
        assert outs[0].read_bytes() == outs[1].read_bytes()
        assert outs[0].read_bytes() != outs[2].read_bytes()

    def test_invalid_damping(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "bad.json", zeta=1.5)
        assert main(["simulate", str(cfg), "--out", str(tmp_path / "x.csv")]) == 1
        assert "damping" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert main(["simulate", str(tmp_path / "none.json"), "--out", str(tmp_path / "x.csv")]) == 3

    def test_beam_config(self, tmp_path):
        out = tmp_path / "beam.csv"
        assert main(["simulate", str(CONFIGS / "beam_zeta1.json"), "--out", str(out)]) == 0
        with out.open() as fh:
            assert fh.readline().strip().split(",")[1:] == [f"v{i}" for i in range(1, 9)]
            assert sum(1 for _ in fh) == 54000


class TestIdentify:
    def test_report_and_plots(self, frame_csv, tmp_path, capsys):
        out = tmp_path / "run.json"
        assert run_identify(frame_csv, out) == 0
        doc = rp.read_json(out)
        assert doc["schema_version"] == rp.SCHEMA_VERSION
        assert doc["method"] == "loewner"
        assert doc["config"]["orders"] == [4, 2, 30]
        assert doc["data"]["sha256"] == rp.sha256_file(frame_csv)
        assert len(doc["modes"]["modes"]) == 3
        assert doc["comparison"]["missing"] == []
        assert "timing" not in doc
        for kind in ("frf", "stab", "shapes"):
            assert (tmp_path / f"run.{kind}.svg").exists()
        assert "3 stable mode(s)" in capsys.readouterr().out

    def test_timing_opt_in(self, frame_csv, tmp_path):
        out = tmp_path / "run.json"
        assert run_identify(frame_csv, out, "--timing", "--no-plots") == 0
        assert set(rp.read_json(out)["timing"]) >= {"correlate", "stabilization"}
        assert not (tmp_path / "run.frf.svg").exists()

    def test_byte_identical_reruns(self, frame_csv, tmp_path):
        for name in ("a", "b"):
            assert run_identify(frame_csv, tmp_path / f"{name}.json") == 0
        for suffix in (".json", ".frf.svg", ".stab.svg", ".shapes.svg"):
            assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()

    def test_reproduce_from_report(self, frame_csv, tmp_path):
        out = tmp_path / "run.json"
        assert run_identify(frame_csv, out, "--no-plots") == 0
        doc = rp.read_json(out)
        again = rp.reproduce(doc)
        assert again.modes.to_dict() == doc["modes"]

    def test_reproduce_detects_changed_data(self, frame_csv, tmp_path):
        out = tmp_path / "run.json"
        assert run_identify(frame_csv, out, "--no-plots") == 0
        frame_csv.write_text(frame_csv.read_text().replace("t,floor1", "t,floorA"))
        with pytest.raises(ValueError, match="changed"):
            rp.reproduce(rp.read_json(out))

    def test_era(self, frame_csv, tmp_path):
        out = tmp_path / "era.json"
        assert run_identify(frame_csv, out, "--method", "era", "--no-plots") == 0
        assert rp.read_json(out)["method"] == "era"

    def test_config_file_and_flag_precedence(self, frame_csv, tmp_path):
        cfg = tmp_path / "id.json"
        cfg.write_text(json.dumps({"method": "era", "seed": 9, "criteria": {"dz_tol": 0.1}}))
        out = tmp_path / "run.json"
        assert run_identify(frame_csv, out, "--config", str(cfg), "--method", "loewner", "--no-plots") == 0
        echoed = rp.read_json(out)["config"]
        assert echoed["method"] == "loewner"
        assert echoed["seed"] == 9
        assert echoed["criteria"]["dz_tol"] == 0.1

    def test_oma_seed_fallback(self, frame_csv, tmp_path, monkeypatch):
        monkeypatch.setenv("OMA_SEED", "42")
        out = tmp_path / "run.json"
        assert run_identify(frame_csv, out, "--no-plots") == 0
        assert rp.read_json(out)["config"]["seed"] == 42
        assert run_identify(frame_csv, out, "--no-plots", "--seed", "5") == 0
        assert rp.read_json(out)["config"]["seed"] == 5

    def test_bad_oma_seed(self, frame_csv, tmp_path, monkeypatch):
        monkeypatch.setenv("OMA_SEED", "abc")
        assert run_identify(frame_csv, tmp_path / "r.json") == 1

    def test_reference_out_of_range(self, frame_csv, tmp_path, capsys):
        assert run_identify(frame_csv, tmp_path / "r.json", "--ref", "3") == 1
        assert "out of range" in capsys.readouterr().err
        assert not (tmp_path / "r.json").exists()

    def test_empty_identification(self, frame_csv, tmp_path, capsys):
        out = tmp_path / "r.json"
        assert run_identify(frame_csv, out, "--min-consec", "40", "--no-plots") == 2
        assert "no mode met" in capsys.readouterr().err
        assert rp.read_json(out)["modes"]["modes"] == []

    def test_missing_data(self, tmp_path):
        assert run_identify(tmp_path / "none.csv", tmp_path / "r.json") == 3

    def test_unwritable_output(self, frame_csv, tmp_path):
        assert run_identify(frame_csv, tmp_path / "no" / "r.json", "--no-plots") == 3

    def test_baseline_flag(self, frame_csv, tmp_path):
        sidecar = sidecar_path(frame_csv)
        moved = tmp_path / "moved.json"
        sidecar.rename(moved)
        out = tmp_path / "r.json"
        assert run_identify(frame_csv, out, "--no-plots") == 0
        assert rp.read_json(out)["comparison"] is None
        assert run_identify(frame_csv, out, "--no-plots", "--baseline", str(moved)) == 0
        assert len(rp.read_json(out)["comparison"]["pairs"]) == 3


class TestCompare:
    def test_self(self, frame_csv, tmp_path, capsys):
        rep = tmp_path / "r.json"
        assert run_identify(frame_csv, rep, "--no-plots") == 0
        capsys.readouterr()
        out = tmp_path / "cmp.json"
        assert main(["compare", str(rep), str(rep), "--out", str(out)]) == 0
        doc = rp.read_json(out)
        assert len(doc["pairs"]) == 3
        for row in doc["pairs"]:
            assert row["df_pct"] == 0 and row["dzeta_pct"] == 0
            assert row["mac"] == pytest.approx(1.0)
        table = capsys.readouterr().out
        assert table.splitlines()[0].split()[:2] == ["Mode", "#"]
        assert out.with_suffix(".txt").read_text() == table

    def test_disjoint(self, tmp_path, capsys):
        a = write_config(tmp_path / "a.json")
        b = write_config(tmp_path / "b.json", stiffnesses=[4.0e4, 3.0e4, 2.0e4], fs=500.0, duration=4.0)
        for cfg in (a, b):
            assert main(["simulate", str(cfg), "--out", str(cfg.with_suffix(".csv"))]) == 0
        capsys.readouterr()
        assert main(["compare", str(a.with_suffix(".baseline.json")), str(b.with_suffix(".baseline.json"))]) == 0
        assert "no modes could be paired" in capsys.readouterr().out

    def test_not_a_modal_document(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{}")
        assert main(["compare", str(p), str(p)]) == 1

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "x.json"
        p.write_text("{nope")
        assert main(["compare", str(p), str(p)]) == 1


class TestPlot:
    @pytest.fixture
    def report(self, frame_csv, tmp_path):
        rep = tmp_path / "r.json"
        assert run_identify(frame_csv, rep, "--no-plots") == 0
        return rep

    @pytest.mark.parametrize("kind", ["stab", "shapes"])
    def test_report_plots_deterministic(self, report, tmp_path, kind):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        assert main(["plot", str(report), "--kind", kind, "--out", str(a)]) == 0
        assert main(["plot", str(report), "--kind", kind, "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert a.read_text().lstrip().startswith("<?xml")

    def test_frf_from_csv(self, frame_csv, tmp_path):
        out = tmp_path / "f.svg"
        assert main(["plot", str(frame_csv), "--kind", "frf", "--out", str(out)]) == 0
        assert "<svg" in out.read_text()

    def test_kind_mismatch(self, frame_csv, report, tmp_path, capsys):
        assert main(["plot", str(report), "--kind", "frf", "--out", str(tmp_path / "x.svg")]) == 1
        assert main(["plot", str(frame_csv), "--kind", "stab", "--out", str(tmp_path / "x.svg")]) == 1

    def test_baseline_has_no_diagram(self, frame_csv, tmp_path):
        side = sidecar_path(frame_csv)
        assert main(["plot", str(side), "--kind", "stab", "--out", str(tmp_path / "x.svg")]) == 1
        assert main(["plot", str(side), "--kind", "shapes", "--out", str(tmp_path / "x.svg")]) == 0


class TestHelpers:
    def test_parse_band(self):
        assert parse_band("0.4:9.5") == (0.4, 9.5)
        with pytest.raises(ValueError, match="LO:HI"):
            parse_band("0.4-9.5")

    def test_sidecar_path(self):
        assert sidecar_path("/a/b/run.csv") == Path("/a/b/run.baseline.json")

    def test_band_flag(self, frame_csv, tmp_path):
        out = tmp_path / "r.json"
        assert run_identify(frame_csv, out, "--band", "1.5:20", "--no-plots") == 0
        freqs = [m["frequency_hz"] for m in rp.read_json(out)["modes"]["modes"]]
        assert np.all(np.array(freqs) >= 1.5)
