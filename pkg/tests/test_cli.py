import json
import subprocess
import sys

import pytest

from permbias.cli import main
from permbias.dataio import read_report


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestSample:
    def test_shape(self, capsys):
        code, out, _ = run(capsys, "sample", "--weights", "1,1", "--count", "4", "--seed", "7")
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 4
        assert all(sorted(l.split(",")) == ["1", "2"] for l in lines)

    def test_deterministic(self, capsys):
        a = run(capsys, "sample", "--weights", "5,3,1", "--count", "50", "--seed", "7")[1]
        b = run(capsys, "sample", "--weights", "5,3,1", "--count", "50", "--seed", "7", "--threads", "4")[1]
        assert a == b

    def test_negative_weight(self, capsys):
        code, _, err = run(capsys, "sample", "--weights", "1,-1", "--count", "2", "--seed", "1")
        assert code == 2
        assert "NonPositiveWeight" in err

    def test_seed_echoed_when_missing(self, capsys):
        code, _, err = run(capsys, "sample", "--weights", "1,2", "--count", "1")
        assert code == 0 and err.startswith("seed: ")

    def test_season_source_uses_team_names(self, capsys):
        code, out, _ = run(
            capsys, "sample", "--input", "premier_league.csv", "--season", "1992-93", "--count", "2", "--seed", "1"
        )
        assert code == 0
        assert "Manchester United" in out


class TestTests:
    def test_exact(self, capsys):
        code, out, _ = run(capsys, "exact", "--weights", "1,2,3", "--observed", "3,2,1")
        d = json.loads(out)
        assert code == 0
        assert d["p_value"] == pytest.approx(2 / 3)
        assert d["decision"] == "no-reject"

    def test_exact_too_large(self, capsys):
        code, _, err = run(capsys, "exact", "--weights", ",".join(["1"] * 11), "--observed", ",".join(map(str, range(1, 12))))
        assert code == 2 and "TooLargeForExact" in err

    def test_pvalue_uniform_censored(self, capsys):
        code, out, _ = run(
            capsys, "pvalue", "--weights", "1,1,1", "--observed", "1,2,3", "--replications", "300", "--seed", "1"
        )
        d = json.loads(out)
        assert d["p_value"] == 0 and d["tie_count"] == 300
        assert d["surprisal"] is None and d["surprisal_censored"]

    def test_pvalue_requires_observed(self, capsys):
        code, _, err = run(capsys, "pvalue", "--weights", "1,2", "--replications", "10", "--seed", "1")
        assert code == 2

    def test_unknown_label(self, capsys):
        code, _, err = run(capsys, "loglik", "--weights", "1,2", "--observed", "1,9")
        assert code == 2 and "InvalidPermutation" in err

    def test_loglik(self, capsys):
        code, out, _ = run(capsys, "loglik", "--weights", "2,1", "--observed", "1,2")
        d = json.loads(out)
        assert d["likelihood"] == pytest.approx(2 / 3)

    def test_both_sources_rejected(self, capsys):
        code, _, _ = run(capsys, "loglik", "--weights", "2,1", "--input", "x.csv", "--observed", "1,2")
        assert code == 2


class TestCalibrate:
    def test_outputs_preferences(self, capsys, tmp_path):
        p = tmp_path / "elo.csv"
        p.write_text("team,elo,win_probability\nA,2000,0.4\nB,1900,0.2\nC,1800,0.05\nD,1700,0.03\n")
        code, out, _ = run(capsys, "calibrate", "--input", str(p))
        assert code == 0
        lines = [l for l in out.splitlines() if not l.startswith("#")]
        assert lines[0] == "team,preference"
        weights = [float(l.split(",")[1]) for l in lines[1:]]
        assert weights == sorted(weights, reverse=True)

    def test_too_few_points(self, capsys, tmp_path):
        p = tmp_path / "elo.csv"
        p.write_text("")
        code, _, err = run(capsys, "calibrate", "--input", str(p))
        assert code == 2 and "TooFewPoints" in err


class TestAnalyze:
    def test_small_run_writes_report(self, capsys, tmp_path):
        out = tmp_path / "r.json"
        code, stdout, _ = run(
            capsys, "analyze", "--input", "la_liga.csv", "--replications", "2000", "--seed", "42", "--output", str(out)
        )
        assert code == 0
        rep = read_report(out)
        assert len(rep.seasons) == 25
        assert rep.seed == 42 and rep.replications == 2000
        # stdout table carries exactly the report's values
        body = [l.split() for l in stdout.splitlines()[1:] if not l.startswith("#")]
        for row, s in zip(body, rep.seasons):
            assert row[-6] == repr(s.observed_loglik)
            assert row[-5] == repr(s.p_value)

    def test_csv_format(self, capsys, tmp_path):
        out = tmp_path / "r.csv"
        code, _, _ = run(
            capsys, "analyze", "--input", "premier_league.csv", "--replications", "500", "--seed", "1",
            "--format", "csv", "--output", str(out),
        )
        assert code == 0
        assert len(out.read_text().splitlines()) == 26

    def test_zero_replications(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["analyze", "--input", "la_liga.csv", "--replications", "0", "--seed", "1"])
        assert exc.value.code == 2

    def test_bad_data_exit_2(self, capsys, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("league,season,team,preference,final_rank\nL,S,A,1.0,1\nL,S,B,2.0,5\n")
        code, _, err = run(capsys, "analyze", "--input", str(p), "--replications", "10", "--seed", "1")
        assert code == 2 and "RankGap" in err

    def test_missing_file_exit_3(self, capsys, tmp_path):
        code, _, _ = run(capsys, "analyze", "--input", str(tmp_path / "nope.csv"), "--replications", "10", "--seed", "1")
        assert code == 3

    def test_unwritable_output_exit_3(self, capsys, tmp_path):
        code, _, _ = run(
            capsys, "analyze", "--input", "la_liga.csv", "--replications", "10", "--seed", "1",
            "--output", str(tmp_path / "no" / "dir" / "r.json"),
        )
        assert code == 3


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "permbias", "sample", "--weights", "9,1", "--count", "3", "--seed", "5"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert len(proc.stdout.splitlines()) == 3
