"""Command-line interface tests (run in-process via cli.main)."""

import json
import math

import pytest

from ballbins import bounds, cli, selfcheck
from ballbins.core import k_norm, validate_distribution
from ballbins.errors import DistSpecError
from ballbins.selfcheck import CheckResult


def run_cli(args, capsys):
    code = cli.main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(args, capsys):
    code, out, err = run_cli(args, capsys)
    assert code == 0, err
    return json.loads(out)


class TestDistSpec:
    def test_uniform(self):
        label, d = cli.parse_dist_spec("uniform:5")
        assert label == "uniform:5" and d.bin_count == 5

    def test_linear(self):
        _, d = cli.parse_dist_spec("linear:3")
        assert list(d.weights) == pytest.approx([1 / 6, 2 / 6, 3 / 6])

    def test_zipf(self):
        _, d = cli.parse_dist_spec("zipf:4:1.0")
        expected = validate_distribution([1, 1 / 2, 1 / 3, 1 / 4])
        assert list(d.weights) == pytest.approx(list(expected.weights))

    def test_inline(self):
        _, d = cli.parse_dist_spec("inline:1,2,3")
        assert d.bin_count == 3

    def test_file(self, tmp_path):
        path = tmp_path / "weights.json"
        path.write_text("[1, 2, 2]")
        _, d = cli.parse_dist_spec(f"file:{path}")
        assert d.bin_count == 3

    @pytest.mark.parametrize(
        "spec",
        ["gaussian:5", "uniform:x", "uniform:", "inline:", "inline:1,oops",
         "zipf:5", "file:/nonexistent/path.json"],
    )
    def test_bad_specs(self, spec):
        with pytest.raises(DistSpecError):
            cli.parse_dist_spec(spec)

    def test_bad_spec_exit_code(self, capsys):
        code, _, err = run_cli(["bound", "gaussian:5", "--m", "3", "--k", "2"], capsys)
        assert code == 2
        assert "gaussian:5" in err


class TestBoundCommand:
    def test_report_values(self, capsys):
        report = run_json(["bound", "uniform:3", "--m", "3", "--k", "2"], capsys)
        assert report["lower"] == pytest.approx(0.6150998205402495, abs=1e-12)
        assert report["upper"] == 1.0
        assert report["rho"] == pytest.approx(3 * (1 / math.sqrt(3)) / 2, rel=1e-12)

    def test_rho_round_trip(self, capsys):
        report = run_json(["bound", "linear:7", "--m", "9", "--k", "3"], capsys)
        _, d = cli.parse_dist_spec(report["dist"])
        recomputed = report["m"] * k_norm(d, report["k"]) / report["k"]
        assert abs(recomputed - report["rho"]) <= 1e-12

    def test_rho_equals_one_case(self, capsys):
        report = run_json(["bound", "uniform:16", "--m", "8", "--k", "2"], capsys)
        assert report["rho"] == pytest.approx(1.0, rel=1e-14)

    def test_single_bin(self, capsys):
        report = run_json(["bound", "inline:1", "--m", "5", "--k", "3"], capsys)
        assert report["lower"] == 1.0 and report["upper"] == 1.0

    def test_subset(self, capsys):
        report = run_json(
            ["bound", "uniform:4", "--m", "4", "--k", "2", "--subset", "0,1"],
            capsys,
        )
        assert report["subset"] == [0, 1]
        assert report["subset_mass"] == pytest.approx(0.5)
        assert report["lower"] == pytest.approx(0.4433216094067262, abs=1e-12)
        assert report["upper"] == pytest.approx(0.75, rel=1e-12)

    def test_subset_duplicates_collapse(self, capsys):
        a = run_json(
            ["bound", "uniform:4", "--m", "4", "--k", "2", "--subset", "0,1,1,0"],
            capsys,
        )
        b = run_json(
            ["bound", "uniform:4", "--m", "4", "--k", "2", "--subset", "0,1"],
            capsys,
        )
        assert a == b

    def test_domain_error_exit_code(self, capsys):
        code, _, err = run_cli(
            ["bound", "uniform:3", "--m", "3", "--k", "2", "--subset", "9"], capsys
        )
        assert code == 3


class TestSolveCommand:
    def test_k_star(self, capsys):
        report = run_json(["solve", "uniform:27", "--m", "27"], capsys)
        assert report["k_star"] == pytest.approx(3.0, abs=1e-9)
        assert report["k_bracket"] == [3, 4] or report["k_bracket"] == [2, 3]

    def test_m_star(self, capsys):
        report = run_json(["solve", "uniform:100", "--k", "2"], capsys)
        assert report["m_star"] == 20.0

    def test_single_bin(self, capsys):
        report = run_json(["solve", "inline:1", "--m", "9"], capsys)
        assert report["k_star"] == 9.0

    def test_requires_exactly_one_mode(self, capsys):
        code, _, _ = run_cli(["solve", "uniform:5"], capsys)
        assert code == 2
        code, _, _ = run_cli(
            ["solve", "uniform:5", "--m", "3", "--k", "2"], capsys
        )
        assert code == 2


class TestWaitCommand:
    def test_k_one_closed_form(self, capsys):
        report = run_json(["wait", "uniform:8", "--k", "1"], capsys)
        assert report["quadrature"] == 1.0

    def test_point_mass(self, capsys):
        report = run_json(["wait", "inline:1", "--k", "4"], capsys)
        assert report["quadrature"] == pytest.approx(4.0, abs=1e-6)
        assert report["m_star"] == 4.0

    def test_birthday_with_simulation(self, capsys):
        report = run_json(
            ["wait", "uniform:365", "--k", "2", "--trials", "5000", "--seed", "4"],
            capsys,
        )
        assert report["quadrature"] == pytest.approx(24.616585894598854, abs=2e-6)
        assert report["expected_wait_lower"] < report["quadrature"]
        assert report["quadrature"] < report["expected_wait_upper"]
        assert report["sim_ci_low"] < report["quadrature"] < report["sim_ci_high"]
        assert report["censored"] == 0


class TestOracleCommand:
    def test_egf(self, capsys):
        report = run_json(["oracle", "uniform:3", "--m", "3", "--k", "2"], capsys)
        assert report["probability"] == pytest.approx(7 / 9, abs=1e-12)
        assert report["method"] == "egf"
        assert report["precision_bits"] >= 166

    def test_enumeration(self, capsys):
        report = run_json(
            ["oracle", "uniform:4", "--m", "4", "--k", "2", "--method",
             "enumeration"],
            capsys,
        )
        assert report["probability"] == pytest.approx(29 / 32, abs=1e-12)
        assert report["method"] == "enumeration"

    def test_subset(self, capsys):
        report = run_json(
            ["oracle", "uniform:4", "--m", "4", "--k", "2", "--subset", "0,1"],
            capsys,
        )
        assert report["probability"] == pytest.approx(0.5, abs=1e-12)

    def test_too_large_exit_code(self, capsys):
        code, _, err = run_cli(
            ["oracle", "uniform:4", "--m", "500", "--k", "2"], capsys
        )
        assert code == 3


class TestSimulateCommand:
    def test_report(self, capsys):
        report = run_json(
            ["simulate", "uniform:3", "--m", "3", "--k", "2", "--trials", "4000",
             "--seed", "8"],
            capsys,
        )
        assert report["successes"] == round(report["frequency"] * 4000)
        assert report["wilson_low"] <= report["frequency"] <= report["wilson_high"]


class TestSweepCommand:
    def test_csv_shape_and_determinism(self, capsys):
        args = ["sweep", "uniform:10", "--k", "2", "--rho-max", "1.5",
                "--points", "8", "--trials", "400", "--seed", "21"]
        code, out1, _ = run_cli(args, capsys)
        assert code == 0
        code, out2, _ = run_cli(args, capsys)
        assert out1 == out2
        lines = out1.strip().split("\n")
        assert lines[0] == ("dist,k,m,rho,lower,upper,empirical,wilson_low,"
                            "wilson_high,exact")
        assert len(lines) > 2
        for line in lines[1:]:
            fields = line.split(",")
            assert fields[0] == "uniform:10"
            lower, upper = float(fields[4]), float(fields[5])
            assert lower <= upper
            assert fields[9] == ""  # no --exact

    def test_exact_column(self, capsys):
        args = ["sweep", "uniform:6", "--k", "2", "--rho-max", "1.0",
                "--points", "5", "--trials", "200", "--seed", "3", "--exact"]
        code, out, _ = run_cli(args, capsys)
        assert code == 0
        for line in out.strip().split("\n")[1:]:
            fields = line.split(",")
            lower, upper = float(fields[4]), float(fields[5])
            exact = float(fields[9])
            assert lower - 1e-12 <= exact <= upper + 1e-12

    def test_exact_beyond_limits_exit_code(self, capsys):
        code, _, err = run_cli(
            ["sweep", "uniform:20000", "--k", "2", "--rho-max", "0.2",
             "--points", "3", "--trials", "50", "--seed", "1", "--exact"],
            capsys,
        )
        assert code == 3

    def test_multiple_k(self, capsys):
        code, out, _ = run_cli(
            ["sweep", "uniform:6", "--k", "1,2", "--rho-max", "1.0",
             "--points", "4", "--trials", "100", "--seed", "5"],
            capsys,
        )
        assert code == 0
        ks = {line.split(",")[1] for line in out.strip().split("\n")[1:]}
        assert ks == {"1", "2"}


class TestCheckCommand:
    def test_reports_and_exit_codes(self, capsys, monkeypatch):
        healthy = [CheckResult(name="x", passed=True, detail="", seconds=0.1)]
        monkeypatch.setattr(
            "ballbins.selfcheck.run_checks", lambda level, seed=0: healthy
        )
        code, out, _ = run_cli(["check", "--level", "fast"], capsys)
        assert code == 0
        assert json.loads(out)["passed"] is True

    def test_corrupted_bound_fails(self, capsys, monkeypatch):
        # Negative control: a corrupted upper bound must flip the sandwich
        # check to failing and surface as exit code 1.
        monkeypatch.setattr(bounds, "max_load_upper", lambda inst: 0.0)
        monkeypatch.setattr(
            selfcheck, "FAST_CHECKS", (selfcheck.check_sandwich_grid,)
        )
        code, out, _ = run_cli(["check", "--level", "fast"], capsys)
        assert code == 1
        report = json.loads(out)
        assert report["passed"] is False
        assert any(not c["passed"] for c in report["checks"])
