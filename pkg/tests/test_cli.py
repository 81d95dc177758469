"""Tests for the diqkd-lab command line: exit codes, printed reports and written artifacts."""

import csv

import pytest

from diqkd_lab import cli


def _rate_from_output(text):
    for line in text.splitlines():
        if line.startswith("r_DW="):
            return float(line.split("=", 1)[1])
    raise AssertionError(f"no r_DW line in:\n{text}")


def _read_curve(path):
    with open(path, newline="") as f:
        return [(float(r["x"]), float(r["rate"])) for r in csv.DictReader(f)]


class TestRate:
    def test_ideal_point(self, capsys):
        assert cli.main(["rate", "--Q", "0", "--S", "2.828427"]) == 0
        out = capsys.readouterr().out
        assert _rate_from_output(out) == pytest.approx(1.0, abs=1e-5)
        assert "secure" in out

    def test_standard_scenario(self, capsys):
        assert cli.main(["rate", "--Q", "0.05", "--S", "2.5", "--scenario", "standard"]) == 0
        assert "scenario=standard" in capsys.readouterr().out

    def test_detection_scenario_from_eta(self, capsys):
        assert cli.main(["rate", "--scenario", "detection", "--eta", "0.95"]) == 0
        assert "detection_efficiency(eta=0.95)" in capsys.readouterr().out

    def test_missing_arguments(self, capsys):
        assert cli.main(["rate", "--Q", "0.01"]) == 2
        assert "--Q and --S" in capsys.readouterr().err

    def test_chsh_beyond_tsirelson(self, capsys):
        assert cli.main(["rate", "--Q", "0", "--S", "3.5"]) == 2
        assert capsys.readouterr().err.startswith("Error:")

    def test_qber_above_half(self, capsys):
        assert cli.main(["rate", "--Q", "0.7", "--S", "2.5"]) == 2
        assert "QBER" in capsys.readouterr().err

    def test_partial_requires_q(self):
        assert cli.main(["rate", "--Q", "0.01", "--S", "2.7", "--scenario", "partial"]) == 2


class TestCurve:
    def test_figure_two(self, tmp_path, capsys):
        out = tmp_path / "fig2.csv"
        assert cli.main(["curve", "--figure", "2", "--out", str(out)]) == 0
        rows = _read_curve(out)
        assert len(rows) == 121
        crossing = next(
            x0 + r0 / (r0 - r1) * (x1 - x0)
            for (x0, r0), (x1, r1) in zip(rows, rows[1:])
            if (r0 > 0) != (r1 > 0)
        )
        assert abs(crossing - 0.071) <= 1e-3
        assert "Zero crossing: 0.07" in capsys.readouterr().out

    def test_figure_two_standard_is_a_separate_run(self, tmp_path, capsys):
        out = tmp_path / "fig2_std.csv"
        assert cli.main(["curve", "--figure", "2", "--scenario", "standard", "--out", str(out)]) == 0
        assert len(_read_curve(out)) == 121
        assert "Zero crossing: 0.11" in capsys.readouterr().out

    def test_figure_three_with_gnuplot(self, tmp_path):
        out = tmp_path / "fig3.csv"
        assert cli.main(["curve", "--figure", "3", "--out", str(out), "--gnuplot"]) == 0
        assert len(_read_curve(out)) == 101
        assert out.with_suffix(".gp").exists()

    def test_partial_needs_q(self, tmp_path):
        assert cli.main(["curve", "--figure", "partial", "--out", str(tmp_path / "p.csv")]) == 2

    def test_partial_curve(self, tmp_path):
        out = tmp_path / "p.csv"
        assert cli.main(["curve", "--figure", "partial", "--q", "0.05", "--steps", "13", "--out", str(out)]) == 0
        assert len(_read_curve(out)) == 13


class TestAttack:
    def test_saturated_attack(self, tmp_path, capsys):
        out = tmp_path / "attack.txt"
        assert cli.main(["attack", "--S", "2.6", "--Q", "0.02", "--out", str(out)]) == 0
        text = capsys.readouterr().out
        assert "lambda_phi_plus=" in text
        assert "saturated=True" in text
        assert out.read_text().strip() == text.strip()

    def test_local_target_rejected(self):
        assert cli.main(["attack", "--S", "1.9"]) == 2


class TestVerify:
    def test_lemma5_suite(self, tmp_path, capsys):
        out = tmp_path / "failures.csv"
        assert cli.main(["verify", "--suite", "lemma5", "--samples", "2000", "--out", str(out)]) == 0
        assert out.read_text().splitlines() == ["check,param_json,value,bound,margin"]
        assert "lemma5: OK" in capsys.readouterr().out

    def test_unknown_suite(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["verify", "--suite", "nope"])
        assert exc.value.code == 2


class TestSimulate:
    def test_writes_log_and_table(self, tmp_path, capsys):
        log, table = tmp_path / "rounds.csv", tmp_path / "table.csv"
        code = cli.main([
            "simulate", "--state", "werner:0.9", "--n", "2000", "--seed", "3",
            "--log", str(log), "--table", str(table),
        ])
        assert code == 0
        assert len(log.read_text().splitlines()) == 2001
        assert table.read_text().splitlines()[0] == "X,Y,a,b,p,count"
        out = capsys.readouterr().out
        assert "provenance=estimated" in out
        assert "alice_marginal_A0=" in out

    def test_attack_state(self):
        assert cli.main(["simulate", "--state", "attack:2.6,0.02", "--n", "2000"]) == 0

    @pytest.mark.parametrize("state", ["ghz", "werner:abc", "attack:2.6", "werner:1.5"])
    def test_bad_state(self, state):
        assert cli.main(["simulate", "--state", state, "--n", "100"]) == 2


class TestMisc:
    def test_bb84_demo(self, capsys):
        assert cli.main(["bb84-demo"]) == 0
        out = capsys.readouterr().out
        assert "local" in out
        assert "H(alice output | Eve) = " in out
        assert "Max |S| = " in out

    def test_no_command(self, capsys):
        assert cli.main([]) == 2
        assert "usage:" in capsys.readouterr().out
