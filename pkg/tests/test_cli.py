import json

import numpy as np
import pytest

from spinsense import cli
from spinsense.runner import TABLE_COLUMNS, estimation_times, simulation_times
from spinsense.estimator import EstimatorConfig


def run(args):
    return cli.main(args)


class TestConfigParsing:
    def test_file_with_comments(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("# comment\nj0 = 2.0\nepsilon=0.25  # inline\nseed=7\n\n")
        values = cli.parse_config_file(str(path))
        assert values == {"j0": 2.0, "epsilon": 0.25, "seed": 7}

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("jay0=2.0\n")
        with pytest.raises(cli.ConfigError, match="unknown key"):
            cli.parse_config_file(str(path))

    def test_bad_value(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("j0=two\n")
        with pytest.raises(cli.ConfigError):
            cli.parse_config_file(str(path))

    def test_missing_file(self):
        with pytest.raises(cli.ConfigError):
            cli.parse_config_file("/nonexistent/run.cfg")

    def test_flags_win_over_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("j0=2.0\nepsilon=0.25\n")
        cfg = cli.build_run_config(
            "simulate", cli.parse_config_file(str(path)), {"j0": 3.0, "m": None}
        )
        assert cfg.params.j0 == 3.0
        assert cfg.params.epsilon == 0.25

    def test_rejects_bad_mode_key(self):
        with pytest.raises(cli.ConfigError):
            cli.build_run_config("simulate", {"mode": "explode"}, {})

    def test_rejects_negative_epsilon(self):
        with pytest.raises(cli.ConfigError):
            cli.build_run_config("simulate", {"epsilon": -0.5}, {})

    def test_sweep_accepts_m_list(self):
        cfg = cli.build_run_config("sweep", {"m": "0.25, 0.5,1.0"}, {})
        assert cfg.m_values == (0.25, 0.5, 1.0)

    def test_simulate_rejects_m_list(self):
        with pytest.raises(cli.ConfigError):
            cli.build_run_config("simulate", {"m": "0.25,0.5"}, {})


class TestGrids:
    def test_simulation_times(self):
        times = simulation_times(2.0, 5)
        assert np.array_equal(times, np.array([0.0, 0.5, 1.0, 1.5, 2.0]))

    def test_single_point_grid(self):
        assert np.array_equal(simulation_times(2.0, 1), np.array([0.0]))

    def test_estimation_times(self):
        times = estimation_times(EstimatorConfig(dt=0.05, t_max=100.0))
        assert times.size == 2001
        assert abs(times[1] - times[0] - 0.05) <= 1e-12
        assert abs(times[-1] - 100.0) <= 1e-9


class TestSimulateCommand:
    def test_noiseless_csv(self, tmp_path):
        out = tmp_path / "series.csv"
        code = run(
            [
                "simulate",
                "--epsilon=0",
                "--m=0",
                "--j0=1",
                "--t_max=2",
                "--n_steps=41",
                "--n_samples=50",
                f"--output={out}",
            ]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t,pr_mc,pr_analytic,c_raw_mc,c_norm_mc,c_norm_analytic"
        data = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
        t = data[:, 0]
        expected = 0.5 * (1 + np.cos(4 * t))
        assert np.abs(data[:, 1] - expected).max() <= 1e-10
        assert np.abs(data[:, 2] - expected).max() <= 1e-10

    def test_single_point_at_zero(self, tmp_path):
        out = tmp_path / "one.csv"
        code = run(
            ["simulate", "--t_max=1", "--n_steps=1", "--n_samples=100", f"--output={out}"]
        )
        assert code == 0
        header, row = out.read_text().splitlines()
        values = dict(zip(header.split(","), (float(x) for x in row.split(","))))
        assert values["t"] == 0.0
        assert abs(values["pr_mc"] - 1.0) <= 1e-12
        assert abs(values["c_norm_mc"] - 1.0) <= 1e-12

    def test_csv_roundtrips_losslessly(self, tmp_path):
        out = tmp_path / "series.csv"
        assert (
            run(
                [
                    "simulate",
                    "--t_max=3",
                    "--n_steps=31",
                    "--n_samples=500",
                    "--seed=5",
                    f"--output={out}",
                ]
            )
            == 0
        )
        from spinsense.model import SystemParams
        from spinsense.noise import NoiseEnsemble
        from spinsense.runner import simulate_table

        table = simulate_table(
            SystemParams(j0=1.0, epsilon=0.5, m=0.0),
            simulation_times(3.0, 31),
            NoiseEnsemble(n_samples=500, master_seed=5),
        )
        lines = out.read_text().splitlines()
        for i, line in enumerate(lines[1:]):
            parsed = [float(x) for x in line.split(",")]
            for col, value in zip(TABLE_COLUMNS, parsed):
                assert value == table[col][i]

    def test_coherence_column_field_invariant(self, tmp_path):
        outputs = {}
        for m in ("0", "2"):
            out = tmp_path / f"series_{m}.csv"
            assert (
                run(
                    [
                        "simulate",
                        f"--m={m}",
                        "--t_max=3",
                        "--n_steps=31",
                        "--n_samples=200",
                        f"--output={out}",
                    ]
                )
                == 0
            )
            lines = out.read_text().splitlines()
            outputs[m] = [line.split(",")[5] for line in lines[1:]]
        assert outputs["0"] == outputs["2"]

    def test_json_format(self, tmp_path):
        out = tmp_path / "series.json"
        assert (
            run(
                [
                    "simulate",
                    "--t_max=1",
                    "--n_steps=3",
                    "--n_samples=100",
                    "--format=json",
                    f"--output={out}",
                ]
            )
            == 0
        )
        records = json.loads(out.read_text())
        assert len(records) == 3
        assert set(records[0]) == set(TABLE_COLUMNS)

    def test_unwritable_output_is_io_error(self, tmp_path):
        code = run(
            ["simulate", "--n_steps=2", "--n_samples=10", "--output=/nonexistent/dir/out.csv"]
        )
        assert code == 2

    def test_bad_flag_is_config_error(self):
        assert run(["simulate", "--epsilon=-1"]) == 1
        assert run(["simulate", "--no_such_flag=1"]) == 1


class TestValidateCommand:
    def test_noiseless_pass(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = run(
            [
                "validate",
                "--epsilon=0",
                "--t_max=2",
                "--n_steps=5",
                "--n_samples=100",
                f"--output={out}",
            ]
        )
        assert code == 0
        captured = capsys.readouterr().out
        assert "PASS" in captured
        report = json.loads(out.read_text())
        assert report["passed"] is True
        assert report["max_error"] < 1e-12

    def test_mc_pass_with_margin(self, capsys):
        # j0 = 2 exercises the generalized closed form against the MC average
        code = run(
            [
                "validate",
                "--j0=2",
                "--epsilon=0.5",
                "--m=1",
                "--t_max=2",
                "--n_steps=9",
                "--n_samples=40000",
            ]
        )
        assert code == 0
        captured = capsys.readouterr().out
        assert "margin" in captured and "PASS" in captured

    def test_failure_exit_code(self, monkeypatch, capsys):
        def shifted(params, t):
            from spinsense.noise import analytic_averaged_density

            rho = analytic_averaged_density(params, t).copy()
            rho[0, 3] += 0.05
            rho[3, 0] += 0.05
            return rho

        monkeypatch.setattr(cli, "analytic_averaged_density", shifted)
        code = run(["validate", "--t_max=2", "--n_steps=5", "--n_samples=1000"])
        assert code == 3
        assert "FAIL" in capsys.readouterr().out


class TestEstimateCommand:
    def test_analytic_recovery(self, tmp_path, capsys):
        out = tmp_path / "estimate.json"
        code = run(["estimate", "--m=0.7", "--t_max=100", "--dt=0.05", f"--output={out}"])
        assert code == 0
        stdout = capsys.readouterr().out
        assert abs(float(stdout.splitlines()[0]) - 0.7) <= 0.007
        record = json.loads(out.read_text())
        assert set(record) == {
            "m_hat",
            "std_err",
            "detected",
            "peak_omega",
            "residual_rms",
            "window_start",
        }
        assert record["detected"] is True
        assert abs(record["m_hat"] - 0.7) <= 0.007

    def test_no_field(self, tmp_path, capsys):
        out = tmp_path / "estimate.json"
        code = run(["estimate", "--m=0", f"--output={out}"])
        assert code == 0
        assert capsys.readouterr().out.splitlines()[0] == "0.000"
        record = json.loads(out.read_text())
        assert record["detected"] is False and record["m_hat"] == 0.0

    def test_aliasing_refused(self, tmp_path, capsys):
        out = tmp_path / "estimate.json"
        code = run(["estimate", "--m=20", f"--output={out}"])
        assert code == 4
        assert "aliasing" in capsys.readouterr().err
        assert json.loads(out.read_text())["detected"] is False

    def test_insufficient_data(self, capsys):
        code = run(["estimate", "--m=0.7", "--t_max=2"])
        assert code == 4
        assert "insufficient" in capsys.readouterr().err

    def test_csv_format(self, tmp_path, capsys):
        out = tmp_path / "estimate.csv"
        code = run(["estimate", "--m=0.7", "--t_max=100", "--format=csv", f"--output={out}"])
        assert code == 0
        header, row = out.read_text().splitlines()
        assert header == "m_hat,std_err,detected,peak_omega,residual_rms,window_start"
        fields = row.split(",")
        assert abs(float(fields[0]) - 0.7) <= 0.007
        assert fields[2] == "true"

    def test_mc_source(self, tmp_path, capsys):
        out = tmp_path / "estimate.json"
        code = run(
            [
                "estimate",
                "--m=1.5",
                "--source=mc",
                "--n_samples=20000",
                "--seed=11",
                f"--output={out}",
            ]
        )
        assert code == 0
        record = json.loads(out.read_text())
        assert record["detected"] is True
        assert abs(record["m_hat"] - 1.5) / 1.5 <= 0.02


class TestSweepCommand:
    def test_analytic_sweep_csv(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = run(["sweep", "--m=0.5,1.0", f"--output={out}"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "m_true,m_hat,std_err,detected,peak_omega,residual_rms,window_start"
        assert len(lines) == 3
        for line, m_true in zip(lines[1:], (0.5, 1.0)):
            fields = line.split(",")
            assert float(fields[0]) == m_true
            assert abs(float(fields[1]) - m_true) / m_true <= 0.01
            assert fields[3] == "true"


class TestDeterminism:
    def test_workers_do_not_change_bytes(self, tmp_path):
        blobs = {}
        for workers in (1, 2, 8):
            out = tmp_path / f"w{workers}.csv"
            code = run(
                [
                    "simulate",
                    "--m=0.7",
                    "--t_max=5",
                    "--n_steps=101",
                    "--n_samples=20000",
                    "--seed=99",
                    f"--workers={workers}",
                    f"--output={out}",
                ]
            )
            assert code == 0
            blobs[workers] = out.read_bytes()
        assert blobs[1] == blobs[2] == blobs[8]

    def test_repeat_run_identical(self, tmp_path):
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{tag}.csv"
            assert (
                run(
                    [
                        "simulate",
                        "--t_max=3",
                        "--n_steps=61",
                        "--n_samples=5000",
                        "--seed=123",
                        f"--output={out}",
                    ]
                )
                == 0
            )
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
