import subprocess
import sys
from pathlib import Path

import pytest

from tscalc.cli import main

FIXTURES = Path(__file__).parent / "fixtures"
Z = "grid(1,-inf,inf)"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestGolden:
    def test_fibonacci(self, capsys):
        code, out, _ = run(capsys, "--cmd", "solve", "--ts", Z, "--alpha", "0.5", "--p", "0.5", "--t0", "1", "--targets", "0..6")
        assert code == 0
        assert out == (FIXTURES / "solve_fibonacci.csv").read_text()
        values = [float(line.split(",")[1]) for line in out.splitlines()[1:]]
        assert values == [1, 1, 2, 3, 5, 8, 13]

    def test_eval_exp(self, capsys):
        code, out, _ = run(capsys, "--cmd", "eval-exp", "--ts", Z, "--p", "0.5", "--t0", "0", "--targets", "0..6")
        assert code == 0
        assert out == (FIXTURES / "eval_exp_integers.csv").read_text()
        for t, line in enumerate(out.splitlines()[1:]):
            cols = [float(x) for x in line.split(",")]
            assert cols[1] == 1.5**t and cols[2] == 2.0**t

    def test_divergence(self, capsys):
        code, out, err = run(capsys, "--cmd", "solve", "--ts", "qgrid(2,+)", "--alpha", "0.5", "--p", "0.5", "--t0", "0", "--targets", "1,2")
        assert code == 4 and out == ""
        assert err == (FIXTURES / "solve_qgrid_divergent.stderr").read_text()
        assert "alpha=0.5 <= q/(q+1)" in err

    def test_spec_file(self, capsys):
        code, out, _ = run(capsys, "--spec", str(FIXTURES / "fibonacci.job"))
        assert code == 0 and out == (FIXTURES / "solve_fibonacci.csv").read_text()

    def test_flags_override_file(self, capsys):
        code, out, _ = run(capsys, "--spec", str(FIXTURES / "fibonacci.job"), "--targets", "6")
        assert code == 0 and out.splitlines()[1:] == ["6.0,13.0,0.0"]


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["--cmd", "partition", "--ts", "interval(0,1"],
            ["--cmd", "solve", "--ts", Z, "--p", "2*", "--targets", "0..3"],
            ["--cmd", "solve", "--ts", Z],
            ["--ts", Z],
            ["--cmd", "solve", "--ts", Z, "--targets", "0..x"],
        ],
    )
    def test_parse_errors(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 2 and out == "" and "parse error" in err

    @pytest.mark.parametrize(
        "argv",
        [
            ["--cmd", "partition", "--ts", "interval(0,1); interval(2,3)"],
            ["--cmd", "solve", "--ts", Z, "--alpha", "1.5", "--targets", "0"],
            ["--cmd", "solve", "--ts", Z, "--t0", "0.5", "--targets", "1"],
            ["--cmd", "solve", "--ts", Z, "--t0", "3", "--targets", "0..5"],
            ["--cmd", "eval-exp", "--ts", Z, "--p", "1", "--targets", "0..3"],
            ["--cmd", "solve", "--ts", "interval(0,2)", "--p", "ln(t-1)", "--targets", "2"],
        ],
    )
    def test_validation_errors(self, capsys, argv):
        code, out, err = run(capsys, *argv)
        assert code == 3 and out == "" and err.startswith("tscalc: error:")

    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["--cmd", "dance", "--ts", Z])
        assert info.value.code == 2


class TestCommands:
    def test_partition(self, capsys):
        code, out, _ = run(capsys, "--cmd", "partition", "--ts", "interval(-1,0); qgrid(2,+)")
        assert code == 0
        assert out.splitlines() == [
            "kind,index,value",
            'atom,0,"interval(-1.0,0.0)"',
            'atom,1,"qgrid(2.0,+)"',
            "switching_point,0,0.0",
        ]

    def test_regress_check(self, capsys):
        code, out, _ = run(capsys, "--cmd", "regress-check", "--ts", Z, "--p", "1", "--targets=-2..2")
        assert code == 0
        lines = out.splitlines()
        assert lines[:2] == ["regressive,true", "nu_regressive,false"]
        assert "nu_witness,1.0" in lines

    def test_verify(self, capsys):
        code, out, _ = run(capsys, "--cmd", "verify", "--ts", "interval(-1,0); qgrid(2,+)", "--p", "0.1*t", "--alpha", "0.8", "--t0", "1")
        assert code == 0 and out.splitlines()[-1] == "ALL PASS"

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "fib.csv"
        code, out, _ = run(capsys, "--spec", str(FIXTURES / "fibonacci.job"), "--out", str(target))
        assert code == 0 and out == ""
        assert target.read_text() == (FIXTURES / "solve_fibonacci.csv").read_text()

    def test_dense_solve(self, capsys):
        code, out, _ = run(capsys, "--cmd", "solve", "--ts", "interval(0,1)", "--p", "2", "--t0", "0", "--targets", "0..1:0.5")
        assert code == 0
        rows = [line.split(",") for line in out.splitlines()[1:]]
        assert [r[2] for r in rows] == ["", "", ""]
        assert float(rows[2][1]) == pytest.approx(2.718281828459045**2, rel=1e-12)

    def test_floats_round_trip(self, capsys):
        _, out, _ = run(capsys, "--cmd", "eval-exp", "--ts", "qgrid(3,+)", "--p", "0.1", "--t0", "1", "--targets", "1,3,9")
        for line in out.splitlines()[1:]:
            for field in line.split(","):
                assert repr(float(field)) == field


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tscalc.cli", "--cmd", "solve", "--ts", Z, "--alpha", "0.5", "--p", "0.5", "--t0", "1", "--targets", "0..6"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout == (FIXTURES / "solve_fibonacci.csv").read_text()
