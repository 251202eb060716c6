import json

import numpy as np
import pytest

from loewner.cli import main


def run(argv):
    return main([str(a) for a in argv])


class TestSimulateCommand:
    def test_writes_trace_files(self, tmp_path):
        out = tmp_path / "run1"
        code = run(["simulate", "--drivers", "const:-1,const:1", "--mode", "controlled",
                    "-N", 1000, "-T", 10, "--out", out])
        assert code == 0
        lines = (tmp_path / "run1.csv").read_text().strip().split("\n")
        assert len(lines) == 1002  # header + 1001 points
        data = json.loads((tmp_path / "run1.json").read_text())
        assert len(data["points"]) == 1001
        manifest = json.loads((tmp_path / "run1.manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["schema_version"] == 1

    def test_single_step_trace(self, tmp_path):
        out = tmp_path / "tiny"
        assert run(["simulate", "--drivers", "const:0", "-N", 1, "-T", 1,
                    "--out", out]) == 0
        rows = (tmp_path / "tiny.csv").read_text().strip().split("\n")[1:]
        pts = [complex(float(r.split(",")[0]), float(r.split(",")[1])) for r in rows]
        assert pts == [2j, 0j]

    def test_byte_identical_reruns(self, tmp_path):
        args = ["simulate", "--drivers", "const:-1,const:1", "--mode", "random",
                "--seed", 7, "-N", 200, "-T", 5]
        assert run(args + ["--out", tmp_path / "a"]) == 0
        assert run(args + ["--out", tmp_path / "b"]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_random_needs_seed(self, tmp_path, capsys):
        code = run(["simulate", "--drivers", "const:-1,const:1", "--mode", "random",
                    "-N", 10, "-T", 1, "--out", tmp_path / "x"])
        assert code == 2
        assert "seed" in capsys.readouterr().err

    def test_bad_driver_spec(self, tmp_path):
        assert run(["simulate", "--drivers", "wiggle:3", "-N", 10, "-T", 1,
                    "--out", tmp_path / "x"]) == 2
        assert run(["simulate", "--drivers", "const:nan", "-N", 10, "-T", 1,
                    "--out", tmp_path / "x"]) == 2
        assert run(["simulate", "--drivers", "table:missing.csv", "-N", 10, "-T", 1,
                    "--out", tmp_path / "x"]) == 2

    def test_runtime_error_exit_code(self, tmp_path, monkeypatch):
        import loewner.cli as cli
        from loewner.errors import LoewnerError

        def boom(config):
            raise LoewnerError("synthetic failure")

        monkeypatch.setattr(cli, "simulate_hull", boom)
        assert run(["simulate", "--drivers", "const:0", "-N", 10, "-T", 1,
                    "--out", tmp_path / "x"]) == 3


class TestSweepCommand:
    def test_controlled_rows(self, tmp_path):
        out = tmp_path / "sweep"
        assert run(["sweep", "--Ns", "10,20,50", "--mode", "controlled", "-T", 5,
                    "--out", out]) == 0
        lines = (tmp_path / "sweep.csv").read_text().strip().split("\n")
        assert len(lines) == 4
        assert lines[0] == "N,mode,seed,err_left,err_right,err_overall"

    def test_random_n_seeds(self, tmp_path):
        out = tmp_path / "rand"
        assert run(["sweep", "--Ns", "50", "--mode", "random", "--n-seeds", 5,
                    "--seed-base", 10, "-T", 2, "--out", out]) == 0
        lines = (tmp_path / "rand.csv").read_text().strip().split("\n")[1:]
        assert [int(l.split(",")[2]) for l in lines] == [10, 11, 12, 13, 14]

    def test_empty_ns_rejected(self, tmp_path):
        assert run(["sweep", "--Ns", "", "--mode", "controlled",
                    "--out", tmp_path / "x"]) == 2

    def test_controlled_with_seeds_rejected(self, tmp_path):
        assert run(["sweep", "--Ns", "10", "--mode", "controlled", "--seeds", "1",
                    "--out", tmp_path / "x"]) == 2

    def test_deterministic_bytes(self, tmp_path):
        args = ["sweep", "--Ns", "20,40", "--mode", "random", "--seeds", "0,1", "-T", 2]
        assert run(args + ["--out", tmp_path / "a"]) == 0
        assert run(args + ["--out", tmp_path / "b"]) == 0
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestReplayCommand:
    def test_replay_simulate_bit_exact(self, tmp_path):
        out = tmp_path / "orig"
        assert run(["simulate", "--drivers", "const:-1,const:1", "--mode", "random",
                    "--seed", 3, "-N", 100, "-T", 5, "--out", out]) == 0
        assert run(["replay", tmp_path / "orig.manifest.json",
                    "--out", tmp_path / "again"]) == 0
        assert (tmp_path / "orig.csv").read_bytes() == (tmp_path / "again.csv").read_bytes()
        m1 = json.loads((tmp_path / "orig.manifest.json").read_text())
        m2 = json.loads((tmp_path / "again.manifest.json").read_text())
        m1["args"].pop("out"), m2["args"].pop("out")
        for m in (m1, m2):
            m.pop("timestamp"), m.pop("outputs")
        assert m1 == m2

    def test_replay_sweep(self, tmp_path):
        out = tmp_path / "sw"
        assert run(["sweep", "--Ns", "10,30", "--mode", "controlled", "-T", 3,
                    "--out", out]) == 0
        assert run(["replay", tmp_path / "sw.manifest.json",
                    "--out", tmp_path / "sw2"]) == 0
        assert (tmp_path / "sw.csv").read_bytes() == (tmp_path / "sw2.csv").read_bytes()


class TestCheckCommand:
    def test_no_suites_is_usage_error(self, capsys):
        assert run(["check"]) == 2

    def test_hcap_check(self, capsys):
        assert run(["check", "--hcap", "-T", 10, "-N", 100]) == 0
        out = capsys.readouterr().out
        assert "PASS hcap" in out

    def test_weights_check_reports_closed_form(self, capsys):
        assert run(["check", "--weights", "-N", 100]) == 0
        out = capsys.readouterr().out
        assert "PASS weights[h=t]" in out
        assert "2.500000000000e-03" in out  # 1/(4*100)

    def test_symmetry_check(self, capsys):
        assert run(["check", "--symmetry"]) == 0
        out = capsys.readouterr().out
        assert out.count("PASS symmetry") == 5

    def test_cara_check(self, capsys):
        assert run(["check", "--cara", "-N", 200, "-T", 5, "--seeds", "0"]) == 0
        out = capsys.readouterr().out
        assert "PASS cara[controlled]" in out
        assert "PASS cara[random seed=0]" in out

    def test_odd_N_weights_usage_error(self):
        assert run(["check", "--weights", "-N", 101]) == 2


class TestParser:
    def test_missing_out_is_usage_error(self):
        assert run(["simulate", "-N", 10]) == 2

    def test_version_flag(self, capsys):
        assert run(["--version"]) == 0
