"""CLI subcommands: exit codes, output files, replay verification."""

import os
import subprocess
import sys

import pytest

from mabfdr import cli
from mabfdr.errors import ConfigError


def null_stream_args(out, runs=3, hyps=20, seed=12):
    return ["simulate", "--family", "uniform-null-p", "--null-fraction", "1.0",
            "--hyps", str(hyps), "--arms", "3", "--runs", str(runs),
            "--seed", str(seed), "--jobs", "1", "--out", str(out)]


def bandit_args(out, seed=19):
    return ["simulate", "--hyps", "8", "--null-fraction", "0.5", "--arms", "3",
            "--truncation", "80", "--runs", "2", "--seed", str(seed),
            "--jobs", "1", "--out", str(out)]


class TestSimulate:
    def test_writes_both_files(self, tmp_path, capsys):
        assert cli.main(null_stream_args(tmp_path / "o")) == 0
        assert (tmp_path / "o" / "audit.csv").exists()
        assert (tmp_path / "o" / "aggregate.csv").exists()
        assert "wrote" in capsys.readouterr().out

    def test_byte_identical_reruns(self, tmp_path):
        assert cli.main(bandit_args(tmp_path / "a")) == 0
        assert cli.main(bandit_args(tmp_path / "b")) == 0
        for name in ("audit.csv", "aggregate.csv"):
            a = (tmp_path / "a" / name).read_bytes()
            b = (tmp_path / "b" / name).read_bytes()
            assert a == b

    def test_seed_changes_output(self, tmp_path):
        cli.main(bandit_args(tmp_path / "a", seed=1))
        cli.main(bandit_args(tmp_path / "b", seed=2))
        assert (tmp_path / "a" / "audit.csv").read_bytes() != \
               (tmp_path / "b" / "audit.csv").read_bytes()

    def test_out_flag_required(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli.main(["simulate", "--hyps", "5"])
        assert exc.value.code == 2

    def test_invalid_alpha_exits_2(self, tmp_path):
        args = null_stream_args(tmp_path / "o") + ["--alpha", "1.5"]
        assert cli.main(args) == 2

    def test_truncation_inf_token(self, tmp_path):
        args = null_stream_args(tmp_path / "o") + ["--truncation", "inf"]
        assert cli.main(args) == 0

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        base = ["simulate", "--family", "uniform-null-p", "--null-fraction", "1.0",
                "--hyps", "10", "--arms", "3", "--runs", "1", "--jobs", "1"]
        monkeypatch.setenv("MABFDR_SEED", "77")
        cli.main(base + ["--out", str(tmp_path / "env")])
        monkeypatch.delenv("MABFDR_SEED")
        cli.main(base + ["--seed", "77", "--out", str(tmp_path / "flag")])
        assert (tmp_path / "env" / "audit.csv").read_bytes() == \
               (tmp_path / "flag" / "audit.csv").read_bytes()

    def test_module_entry_point(self, tmp_path):
        out = tmp_path / "o"
        proc = subprocess.run(
            [sys.executable, "-m", "mabfdr"] + null_stream_args(out, runs=1, hyps=5)[:],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        assert (out / "audit.csv").exists()


class TestConfigFile:
    def test_file_applies_and_flags_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "family = uniform-null-p  # comment\n"
            "null-fraction = 1.0\n"
            "hyps = 6\n"
            "arms = 3\n"
            "seed = 5\n"
            "runs = 2\n")
        args = cli.make_parser().parse_args(
            ["simulate", "--config", str(cfg), "--seed", "9", "--out", "x"])
        config = cli.build_config(args)
        assert config.family == "uniform-null-p"
        assert config.hypotheses == 6
        assert config.runs == 2
        assert config.seed == 9  # flag wins over file

    def test_file_seed_beats_env(self, tmp_path, monkeypatch):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("seed = 5\n")
        monkeypatch.setenv("MABFDR_SEED", "3")
        args = cli.make_parser().parse_args(
            ["simulate", "--config", str(cfg), "--out", "x"])
        assert cli.build_config(args).seed == 5

    def test_unknown_key_exits_2(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("banana = 1\n")
        assert cli.main(["simulate", "--config", str(cfg), "--out",
                         str(tmp_path / "o")]) == 2

    def test_missing_config_file_exits_2(self, tmp_path):
        assert cli.main(["simulate", "--config", str(tmp_path / "none.cfg"),
                         "--out", str(tmp_path / "o")]) == 2

    def test_malformed_line_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just a line\n")
        with pytest.raises(ConfigError, match="line 1"):
            cli._read_config_file(str(cfg))


class TestSweep:
    def test_truncation_grid(self, tmp_path, capsys):
        out = tmp_path / "o"
        args = ["sweep", "--family", "uniform-null-p", "--null-fraction", "1.0",
                "--hyps", "10", "--arms", "3", "--runs", "2", "--seed", "4",
                "--jobs", "1", "--grid", "truncation=60,90", "--out", str(out)]
        assert cli.main(args) == 0
        from mabfdr.csvio import read_aggregate
        rows = read_aggregate(str(out / "aggregate.csv"))
        assert [r["truncation"] for r in rows] == [60.0, 90.0]

    def test_pi1_range_grid(self, tmp_path):
        out = tmp_path / "o"
        args = ["sweep", "--family", "uniform-null-p", "--hyps", "8",
                "--arms", "3", "--truncation", "60", "--runs", "1", "--seed", "4",
                "--jobs", "1", "--grid", "pi1=0:0.4:0.2", "--out", str(out)]
        assert cli.main(args) == 0
        from mabfdr.csvio import read_aggregate
        rows = read_aggregate(str(out / "aggregate.csv"))
        assert [r["scenario_id"] for r in rows] == [
            "uniform-null-p|pi1=0", "uniform-null-p|pi1=0.2", "uniform-null-p|pi1=0.4"]

    @pytest.mark.parametrize("grid", [
        "alpha=0.1,0.2",      # not a sweepable parameter
        "truncation",          # no values at all
        "truncation=",         # empty list
        "truncation=5:1:1",    # start past stop
        "truncation=1:9",      # malformed range
        "truncation=1:9:0",    # zero step
        "pi1=0.2,1.5",         # outside [0, 1]
    ])
    def test_bad_grids_exit_2(self, tmp_path, grid):
        args = ["sweep", "--family", "uniform-null-p", "--null-fraction", "1.0",
                "--hyps", "5", "--arms", "3", "--runs", "1", "--jobs", "1",
                "--grid", grid, "--out", str(tmp_path / "o")]
        assert cli.main(args) == 2

    def test_parse_grid_values(self):
        assert cli._parse_grid("truncation=100:300:100") == \
            ("truncation", [100.0, 200.0, 300.0])
        assert cli._parse_grid("pi1=0.1,0.4") == ("pi1", [0.1, 0.4])
        assert cli._parse_grid("arms=10,30,50") == ("arms", [10.0, 30.0, 50.0])


class TestReplay:
    @pytest.fixture
    def audit_path(self, tmp_path):
        cli.main(bandit_args(tmp_path / "o"))
        return tmp_path / "o" / "audit.csv"

    def test_clean_audit_passes(self, audit_path, capsys):
        assert cli.main(["replay", str(audit_path)]) == 0
        out = capsys.readouterr().out
        assert "consistent (16 rows, 2 runs)" in out

    def test_flipped_decision_detected(self, audit_path, capsys):
        lines = audit_path.read_text().splitlines()
        idx = 3  # first data row
        fields = lines[idx].split(",")
        fields[5] = "1" if fields[5] == "0" else "0"
        lines[idx] = ",".join(fields)
        audit_path.write_text("\n".join(lines) + "\n")
        assert cli.main(["replay", str(audit_path)]) == 3
        assert "error" in capsys.readouterr().err

    def test_tampered_level_detected(self, audit_path):
        lines = audit_path.read_text().splitlines()
        fields = lines[4].split(",")
        fields[3] = "0.099"
        lines[4] = ",".join(fields)
        audit_path.write_text("\n".join(lines) + "\n")
        assert cli.main(["replay", str(audit_path)]) == 3

    def test_tampered_wealth_detected(self, audit_path):
        lines = audit_path.read_text().splitlines()
        fields = lines[3].split(",")
        fields[9] = "0.001"
        lines[3] = ",".join(fields)
        audit_path.write_text("\n".join(lines) + "\n")
        assert cli.main(["replay", str(audit_path)]) == 3

    def test_missing_file_exits_3(self, tmp_path):
        assert cli.main(["replay", str(tmp_path / "nope.csv")]) == 3

    def test_empty_audit_exits_3(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(
            "# schema=mabfdr.audit.v1\n"
            "# fdr=lord alpha=0.1 w0=0.05\n"
            "run_id,j,truth,alpha_j,pvalue,rejected,returned_arm,samples,"
            "truncated,wealth_after\n")
        assert cli.main(["replay", str(path)]) == 3


class TestParser:
    def test_subcommand_required(self):
        with pytest.raises(SystemExit) as exc:
            cli.main([])
        assert exc.value.code == 2

    def test_help_lists_subcommands(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for name in ("simulate", "sweep", "replay"):
            assert name in out
