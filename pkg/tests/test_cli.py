import csv
import json
import subprocess
import sys

from vicond.cli import main


def test_solve_converged_run_exits_zero(tmp_path):
    out, rep = tmp_path / "t.csv", tmp_path / "r.json"
    code = main(["solve", "--algorithm", "B", "--variant", "2", "--normal-u", "unit",
                 "--normal-v", "unit", "--out", str(out), "--report", str(rep)])
    assert code == 0
    report = json.loads(rep.read_text())
    assert report["termination"] in ("ResidualMet", "FixedPoint")
    rows = list(csv.reader(out.open()))
    assert float(rows[-1][-1]) <= 1e-6


def test_solve_iteration_cap_exits_two(tmp_path):
    assert main(["solve", "--max-iters", "3", "--out", str(tmp_path / "t.csv")]) == 2
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 5


def test_solve_errors_exit_one(tmp_path, capsys):
    assert main(["solve", "--algorithm", "cond-ext", "--beta", "0.4"]) == 1
    assert "1/(L+1)" in capsys.readouterr().err
    bad = tmp_path / "bad.toml"
    bad.write_text("variant = \n")
    assert main(["solve", "--spec", str(bad)]) == 1
    assert main(["solve", "--x0", "1,1"]) == 1
    assert main(["solve", "--x0", "1,1", "--project-start", "--max-iters", "2"]) == 2


def test_spec_file_with_flag_override(tmp_path):
    spec = tmp_path / "run.toml"
    spec.write_text('algorithm = "F"\nvariant = 3\nnormal_u = "unit"\nnormal_v = "unit"\n')
    rep = tmp_path / "r.json"
    assert main(["solve", "--spec", str(spec), "--max-iters", "4", "--report", str(rep)]) == 2
    report = json.loads(rep.read_text())
    assert report["spec"]["variant"] == 3 and report["spec"]["max_iters"] == 4


def test_compare_and_figures(tmp_path):
    spec = tmp_path / "cmp.toml"
    spec.write_text('table = "cmp.csv"\nalgorithm = "F"\n\n[[run]]\nvariant = 2\n\n'
                    '[[run]]\nvariant = 3\nnormal_u = "unit"\nnormal_v = "unit"\n')
    assert main(["compare", "--spec", str(spec), "--out-dir", str(tmp_path)]) == 0
    assert len((tmp_path / "cmp.csv").read_text().splitlines()) == 3
    assert main(["figures", "--out-dir", str(tmp_path / "figs"), "--max-iters", "20"]) == 0
    assert (tmp_path / "figs" / "fig8_with_full.csv").exists()


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "vicond.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "solve" in out.stdout
