import json

import numpy as np
import pytest

from cubegreen.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


class TestBasicCommands:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "cubegreen" in capsys.readouterr().out

    def test_family_enumerate(self, capsys):
        rep = run_json(capsys, "family", "--enumerate", "--m", "3")
        assert rep["result"]["count"] == 19

    def test_coeffs_known_margins(self, capsys):
        rep = run_json(capsys, "coeffs", "--family-known-margins-V", "",
                       "--m", "3")
        assert rep["result"]["a"]["{1,2,3}"] == -2

    def test_green_eval(self, capsys):
        rep = run_json(capsys, "green-eval", "--family-empty", "--m", "2",
                       "--x", "0.2,0.5", "--xi", "0.3,0.7")
        assert rep["result"]["value"] == pytest.approx(0.1)

    def test_lambda_diagonal(self, capsys):
        rep = run_json(capsys, "lambda", "--family-known-margins-V", "",
                       "--m", "2", "--measure", "diagonal")
        assert rep["result"]["inverse_lambda"] == pytest.approx(90.0, abs=1e-8)

    def test_solve_with_eval_points(self, capsys):
        rep = run_json(capsys, "solve", "--family-known-margins-V", "",
                       "--m", "2", "--eval-at", "0.5,0.5",
                       "--eval-at", "0.25,0.75")
        omega = rep["result"]["omega"]
        assert len(omega) == 2
        x1, x2 = 0.5, 0.5
        raw = x1 * x2 * ((2 - x1) * (2 - x2) + x1 + x2 - 3)
        lam = rep["result"]["lambda"]
        assert omega[0]["omega"] == pytest.approx(raw / (4 * lam), rel=1e-10)

    def test_efficiency(self, capsys):
        rep = run_json(capsys, "efficiency", "--V", "", "--m", "2",
                       "--measure", "diagonal+antidiagonal")
        assert rep["result"]["efficiency_coefficient"] == pytest.approx(
            24.0, abs=1e-6)

    def test_eigen(self, capsys):
        rep = run_json(capsys, "eigen", "--family-all", "--m", "2",
                       "--grid-n", "24")
        assert rep["result"]["value"] == pytest.approx(np.pi**-4, rel=1e-3)


class TestStatCommand:
    @pytest.fixture
    def csv_path(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("0.1,0.2\n0.4,0.5\n0.9,0.8\n")
        return str(path)

    def test_footrule(self, capsys, csv_path):
        rep = run_json(capsys, "stat", "--name", "footrule",
                       "--input", csv_path)
        assert rep["result"]["value"] == 0.0

    def test_rho_with_rank_pit(self, capsys, csv_path):
        rep = run_json(capsys, "stat", "--name", "rho", "--input", csv_path,
                       "--rank-pit")
        assert rep["result"]["value"] == pytest.approx(1.0)
        assert rep["config"]["rank_pit"] is True

    def test_stat_B(self, capsys, csv_path):
        rep = run_json(capsys, "stat", "--name", "B", "--input", csv_path,
                       "--V", "1,2")
        X = np.array([[0.1, 0.2], [0.4, 0.5], [0.9, 0.8]])
        expected = np.prod(1 - X, axis=1).mean() - 0.25
        assert rep["result"]["value"] == pytest.approx(expected, abs=1e-14)

    def test_missing_file_is_io_error(self, capsys):
        code, _, err = run_cli(capsys, "stat", "--name", "rho",
                               "--input", "/nonexistent/x.csv")
        assert code == 1
        assert "io-error" in err


class TestSimulateCommand:
    def test_cov_report(self, capsys):
        rep = run_json(capsys, "simulate", "--mode", "cov", "--V", "1,2",
                       "--m", "2", "--n", "50", "--R", "200",
                       "--seed", "3", "--grid-n", "2")
        assert rep["result"]["max_dev_in_se"] < 6.0
        assert len(rep["result"]["theoretical"]) == 4

    def test_nulldist_deterministic_across_threads(self, capsys):
        reports = []
        for threads in ("1", "4"):
            rep = run_json(capsys, "simulate", "--mode", "nulldist",
                           "--stat", "rho", "--m", "2", "--n", "30",
                           "--R", "200", "--seed", "11",
                           "--threads", threads)
            rep.pop("timing")
            reports.append(rep)
        reports[0]["config"].pop("threads")
        reports[1]["config"].pop("threads")
        assert reports[0] == reports[1]

    def test_field_mode(self, capsys):
        rep = run_json(capsys, "simulate", "--mode", "field", "--m", "2",
                       "--grid-n", "2", "--count", "5", "--seed", "1")
        draws = np.asarray(rep["result"]["draws"])
        assert draws.shape == (5, 4)

    def test_csv_output(self, capsys, tmp_path):
        out = tmp_path / "cov.csv"
        code, _, err = run_cli(capsys, "simulate", "--mode", "tiedcov",
                               "--m", "2", "--n", "40", "--R", "150",
                               "--seed", "2", "--grid-n", "2",
                               "--output", "csv", "--out-file", str(out))
        assert code == 0, err
        text = out.read_text()
        assert "# empirical" in text and "# theoretical" in text


class TestErrorHandling:
    def test_malformed_family_json(self, capsys):
        code, _, err = run_cli(capsys, "coeffs", "--family", "not json",
                               "--m", "2")
        assert code == 2
        assert err.startswith("error:")

    def test_non_monotone_family(self, capsys):
        code, _, err = run_cli(capsys, "coeffs", "--family", "[[1]]",
                               "--m", "2")
        assert code == 2

    def test_bad_measure_name(self, capsys):
        code, _, err = run_cli(capsys, "lambda", "--family-empty", "--m", "2",
                               "--measure", "gauss")
        assert code == 2

    def test_timing_present_and_isolated(self, capsys):
        rep = run_json(capsys, "coeffs", "--family-all", "--m", "2")
        assert "seconds" in rep["timing"]
        assert "seconds" not in json.dumps(rep["config"]) + json.dumps(rep["result"])
