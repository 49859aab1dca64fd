import io
import json
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from haargauss import load_matrix_csv
from haargauss.cli import ConfigError, main, parse_config, run
from haargauss.reporting import (
    Histogram,
    Overlay,
    emit_svg_histogram,
    histogram_with_overflow,
    write_histogram_csv,
)


def _run_dir_of(base: Path) -> Path:
    dirs = [p for p in base.iterdir() if p.is_dir()]
    assert len(dirs) == 1
    return dirs[0]


class TestParseConfig:
    def test_flags_only(self, tmp_path):
        cfg = parse_config(
            ["distance", "--n", "2000", "--p", "10", "--q", "10", "--kind", "tv",
             "--output-dir", str(tmp_path)]
        )
        assert len(cfg.grid) == 1
        d = cfg.grid[0]
        assert (d.n, d.p, d.q) == (2000, 10, 10)
        assert cfg.kind == "tv"
        assert cfg.replicates == 10_000

    def test_json_grid(self, tmp_path):
        payload = {
            "grid": [{"n": 200, "p": 5, "q": 4}, {"n": 300, "p": 6, "q": 6}],
            "replicates": 64,
            "master_seed": 9,
            "format": "json",
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(payload))
        cfg = parse_config(["distance", "--config", str(path), "--output-dir", str(tmp_path)])
        assert len(cfg.grid) == 2
        assert cfg.replicates == 64
        assert cfg.master_seed == 9
        assert cfg.format == "json"

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"replicates": 64, "master_seed": 9}))
        cfg = parse_config(
            ["distance", "--config", str(path), "--n", "100", "--p", "4", "--q", "4",
             "--replicates", "32", "--output-dir", str(tmp_path)]
        )
        assert cfg.replicates == 32
        assert cfg.master_seed == 9

    def test_clt_figure_grid_config(self, tmp_path):
        payload = {"grid": [{"p": p, "q": q} for p, q in
                            [(165, 30), (900, 30), (1600, 40), (355, 50), (2500, 50), (10000, 100)]]}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(payload))
        cfg = parse_config(["clt", "--config", str(path), "--output-dir", str(tmp_path)])
        assert len(cfg.grid) == 6

    def test_invalid_dims(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(["distance", "--n", "10", "--p", "0", "--q", "2",
                          "--output-dir", str(tmp_path)])

    def test_missing_command(self):
        with pytest.raises(ConfigError):
            parse_config([])

    def test_unknown_config_keys(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"wat": 1}))
        with pytest.raises(ConfigError):
            parse_config(["verify", "--config", str(path), "--output-dir", str(tmp_path)])

    def test_command_mismatch(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"command": "clt"}))
        with pytest.raises(ConfigError):
            parse_config(["distance", "--config", str(path), "--n", "10", "--p", "2",
                          "--q", "2", "--output-dir", str(tmp_path)])


class TestMainExitCodes:
    def test_config_error_is_2(self, tmp_path, capsys):
        code = main(["distance", "--n", "10", "--p", "0", "--q", "2",
                     "--output-dir", str(tmp_path)])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_distance_run_is_0(self, tmp_path):
        code = main(["distance", "--n", "60", "--p", "3", "--q", "2", "--kind", "tv",
                     "-N", "50", "--seed", "1", "--output-dir", str(tmp_path)])
        assert code == 0


class TestDistanceCommand:
    def test_run_directory_layout(self, tmp_path):
        code = main(["distance", "--n", "80", "--p", "4", "--q", "3", "-N", "60",
                     "--seed", "5", "--output-dir", str(tmp_path)])
        assert code == 0
        run_dir = _run_dir_of(tmp_path)
        assert run_dir.name.startswith("distance-")
        assert run_dir.name.endswith("-5")
        for name in ("config.json", "results.csv", "timing.json"):
            assert (run_dir / name).exists()
        lines = (run_dir / "results.csv").read_text().splitlines()
        assert lines[0] == "n,p,q,kind,N,seed,mean,std_error,status"
        assert len(lines) == 4  # header + tv + kl + hellinger

    def test_unsupported_regime_row(self, tmp_path):
        code = main(["distance", "--n", "2", "--p", "2", "--q", "2", "-N", "16",
                     "--kind", "tv", "--output-dir", str(tmp_path)])
        assert code == 0
        body = (_run_dir_of(tmp_path) / "results.csv").read_text()
        assert "UNSUPPORTED_REGIME" in body

    def test_thread_count_invariance_bytes(self, tmp_path):
        outputs = []
        for threads, sub in ((1, "a"), (4, "b")):
            base = tmp_path / sub
            base.mkdir()
            code = main(["distance", "--n", "100", "--p", "5", "--q", "4", "-N", "200",
                         "--seed", "3", "--threads", str(threads),
                         "--output-dir", str(base)])
            assert code == 0
            outputs.append((_run_dir_of(base) / "results.csv").read_bytes())
        assert outputs[0] == outputs[1]

    def test_json_format(self, tmp_path):
        code = main(["distance", "--n", "60", "--p", "3", "--q", "2", "-N", "40",
                     "--kind", "kl", "--format", "json", "--output-dir", str(tmp_path)])
        assert code == 0
        payload = json.loads((_run_dir_of(tmp_path) / "results.json").read_text())
        assert payload[0]["kind"] == "kl"
        assert isinstance(payload[0]["mean"], float)


class TestSampleCommand:
    def test_haar_dump(self, tmp_path):
        code = main(["sample", "--n", "12", "--p", "4", "--q", "3", "--kind", "haar",
                     "--seed", "2", "--output-dir", str(tmp_path)])
        assert code == 0
        run_dir = _run_dir_of(tmp_path)
        m = load_matrix_csv(run_dir / "haar-0.csv")
        assert m.shape == (4, 3)

    def test_coupled_dump(self, tmp_path):
        code = main(["sample", "--n", "12", "--p", "4", "--q", "3", "--kind", "coupled",
                     "--seed", "2", "--output-dir", str(tmp_path)])
        assert code == 0
        run_dir = _run_dir_of(tmp_path)
        y = load_matrix_csv(run_dir / "coupled-y-0.csv")
        gamma = load_matrix_csv(run_dir / "coupled-gamma-0.csv")
        assert y.shape == gamma.shape == (4, 3)


class TestMomentsCommand:
    def test_prints_rationals(self, tmp_path):
        buffer = io.StringIO()
        cfg = parse_config(["moments", "--n", "10", "--p", "2", "--q", "3",
                            "--output-dir", str(tmp_path)])
        _, records, code = run(cfg, out=buffer)
        assert code == 0
        text = buffer.getvalue()
        assert "trace_power_1 = 3/5 = 0.59999999999999998" in text
        assert any(r.row["quantity"] == "entry_g11_sq" for r in records)


class TestCouplingCommand:
    def test_q1_artifacts(self, tmp_path):
        code = main(["coupling", "--n", "200", "--p", "100", "--q", "1", "-N", "400",
                     "--seed", "7", "--output-dir", str(tmp_path)])
        assert code == 0
        run_dir = _run_dir_of(tmp_path)
        svg = run_dir / "coupling-hs-0.svg"
        assert svg.exists()
        root = ET.parse(svg).getroot()
        assert root.tag.endswith("svg")
        body = (run_dir / "results.csv").read_text()
        assert "ks_half_normal" in body.splitlines()[0]


class TestCltCommand:
    def test_single_point_run(self, tmp_path):
        code = main(["clt", "--p", "60", "--q", "8", "-N", "300", "--seed", "4",
                     "--output-dir", str(tmp_path)])
        assert code == 0
        run_dir = _run_dir_of(tmp_path)
        hist_csv = run_dir / "clt-hist-0.csv"
        assert hist_csv.exists()
        lines = hist_csv.read_text().splitlines()
        assert lines[0] == "bin_lo,bin_hi,count,density"
        assert len(lines) == 1 + 61 + 2  # header + bins + overflow rows
        root = ET.parse(run_dir / "clt-hist-0.svg").getroot()
        polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
        assert polylines, "expected the analytic overlay curve"


class TestVerifyCommand:
    def test_exit_zero_and_report(self, tmp_path, capsys):
        code = main(["verify", "--output-dir", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "row_normalization" in out
        body = (_run_dir_of(tmp_path) / "results.csv").read_text()
        assert "trace_power_full_dimension" in body
        assert "FAIL" not in body


class TestSvgHistogram:
    def test_zero_mass_rejected(self, tmp_path):
        hist = Histogram(
            edges=np.linspace(-1, 1, 5), counts=np.zeros(4, dtype=np.int64),
            underflow=0, overflow=0, total=0,
        )
        with pytest.raises(ValueError):
            emit_svg_histogram(hist, Overlay("normal"), tmp_path / "x.svg")

    def test_empty_samples_rejected(self):
        with pytest.raises(ValueError):
            histogram_with_overflow(np.array([]))

    def test_density_bars_track_normal_curve(self, tmp_path):
        from haargauss import RngStream

        draws = RngStream(55, 0).standard_normal(10_000)
        hist = histogram_with_overflow(draws)
        centers = 0.5 * (hist.edges[:-1] + hist.edges[1:])
        density = hist.counts / (hist.total * np.diff(hist.edges))
        phi = np.exp(-0.5 * centers**2) / np.sqrt(2 * np.pi)
        central = np.abs(centers) <= 2.0
        assert np.max(np.abs(density[central] - phi[central])) < 0.05
        path = emit_svg_histogram(hist, Overlay("normal"), tmp_path / "n.svg")
        ET.parse(path)  # well-formed XML

    def test_histogram_csv_round_numbers(self, tmp_path):
        hist = histogram_with_overflow(np.array([0.0, 0.5, 10.0]))
        path = write_histogram_csv(hist, tmp_path / "h.csv")
        lines = path.read_text().splitlines()
        assert lines[1].startswith("-inf,")
        assert lines[-1].endswith("1,")  # one overflow sample


class TestThreadEnvVar:
    def test_env_override(self, monkeypatch):
        from haargauss.parallel import THREADS_ENV_VAR, thread_count

        monkeypatch.setenv(THREADS_ENV_VAR, "3")
        assert thread_count() == 3
        assert thread_count(2) == 2  # explicit request wins
        monkeypatch.setenv(THREADS_ENV_VAR, "0")
        with pytest.raises(ValueError):
            thread_count()


class TestExitCodeOne:
    def test_failed_identity_returns_1(self, tmp_path, monkeypatch):
        import haargauss.cli as cli_module

        monkeypatch.setattr(cli_module, "_verify_checks", lambda: [("stub", 1, False)])
        code = main(["verify", "--output-dir", str(tmp_path)])
        assert code == 1
        body = (_run_dir_of(tmp_path) / "results.csv").read_text()
        assert "FAIL" in body


class TestFigureGridWiring:
    def test_six_svgs_written(self, tmp_path, monkeypatch):
        import haargauss.cli as cli_module
        from haargauss.limits import FIGURE_GRID, CltGridPoint
        from haargauss import RngStream

        def fake_grid(seed, threads=None):
            draws = RngStream(seed, 0).standard_normal(500)
            return [
                CltGridPoint(p=p, q=q, replicates=500, ks_normal=0.01, w_samples=draws)
                for p, q in FIGURE_GRID
            ]

        monkeypatch.setattr(cli_module, "clt_figure_grid", fake_grid)
        code = main(["clt", "--figure-grid", "--seed", "8", "--output-dir", str(tmp_path)])
        assert code == 0
        run_dir = _run_dir_of(tmp_path)
        assert len(list(run_dir.glob("clt-hist-*.svg"))) == 6
        assert len(list(run_dir.glob("clt-hist-*.csv"))) == 6
        lines = (run_dir / "results.csv").read_text().splitlines()
        assert len(lines) == 7


class TestFreshRunDirectories:
    def test_runs_never_append(self, tmp_path):
        for _ in range(2):
            code = main(["moments", "--n", "6", "--p", "2", "--q", "2",
                         "--output-dir", str(tmp_path)])
            assert code == 0
        dirs = [p for p in tmp_path.iterdir() if p.is_dir()]
        assert len(dirs) == 2
