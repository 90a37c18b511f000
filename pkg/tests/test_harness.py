import csv
import json

import numpy as np
import pytest

from vicond import RunSpec, compare_runs, load_run_spec, run_experiment
from vicond.errors import ParseError, ValidationError
from vicond.harness import (dump_run_spec, figure_pair, load_compare_spec, parse_run_spec,
                            problem_from_dict, problem_to_dict, run_figures)

import oracles

INLINE = """
algorithm = "B"
variant = 2
x0 = [1.0, 1.0]

[problem]
name = "box"
set = { type = "box", lo = [-1, -1], hi = [1, 1] }
operator = { A = [[3.1, 2.3], [-1.7, 2.9]], b = [-0.7, 1.3], lipschitz = 4.5 }
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_minimal_spec_defaults(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text('problem = "example31"\nalgorithm = "F"\nvariant = 1\n')
    spec = load_run_spec(p)
    assert spec == RunSpec()
    assert (spec.delta, spec.theta, spec.sigma, spec.cap_M, spec.beta) == (0.5, 0.5, 1.0, 1.0, 0.25)
    assert (spec.tol, spec.max_iters, spec.x0) == (1e-8, 10_000, (0.0, 1.0))


def test_beta_bound_is_validated():
    with pytest.raises(ValidationError, match=r"1/\(L\+1\)"):
        parse_run_spec('algorithm = "cond-ext"\nbeta_hat = 0.4\n')
    with pytest.raises(ValidationError):
        RunSpec(algorithm="cond-ext", beta=0.4)


def test_parse_errors_name_the_problem():
    with pytest.raises(ParseError, match="line"):
        parse_run_spec('algorithm = "F"\nvariant = \n')
    with pytest.raises(ParseError, match="colour"):
        parse_run_spec('colour = "blue"\n')
    with pytest.raises(ParseError, match="variant"):
        parse_run_spec('variant = "two"\n')
    with pytest.raises(ValidationError, match="x0"):
        parse_run_spec('x0 = [1.0, 1.0]\n')
    assert parse_run_spec('x0 = [1.0, 1.0]\nproject_start = true\n').project_start


def test_inline_problem_round_trip():
    spec = parse_run_spec(INLINE)
    problem = spec.build_problem()
    np.testing.assert_array_equal(problem.op.A, [[3.1, 2.3], [-1.7, 2.9]])
    assert problem.op.lipschitz == 4.5
    again = parse_run_spec(dump_run_spec(spec))
    assert again == spec
    assert problem_to_dict(problem_from_dict(spec.problem)) == spec.problem


def test_inline_problem_errors():
    with pytest.raises(ValidationError):
        problem_from_dict({"set": {"type": "box", "lo": [0, 0], "hi": [1, 1]}})
    with pytest.raises(ValidationError):
        problem_from_dict({"set": {"type": "star"}, "operator": {"A": [[1]], "b": [0]}})
    with pytest.raises(ValidationError):
        RunSpec(problem="nowhere")


def test_run_experiment_writes_csv_and_report(tmp_path):
    spec = RunSpec(algorithm="B", variant=2, normal_u="unit", normal_v="unit",
                   trajectory="t.csv", report="r.json")
    report = run_experiment(spec, out_dir=tmp_path)
    rows = read_csv(tmp_path / "t.csv")
    assert rows[0] == ["k", "x_1", "x_2", "residual", "alpha", "beta", "norm_u", "norm_vbar",
                       "dist_to_solution"]
    assert len(rows) == report.iterations + 2
    assert rows[1][4:8] == ["", "", "", ""]           # no step data before the first step
    last = rows[-1]
    assert float(last[-1]) <= 1e-4
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["termination"] == report.termination
    assert rep["final_x"] == [float(last[1]), float(last[2])]
    # 17 significant digits round-trip
    assert float(last[1]) == report.final_x[0]


def test_f1_run_reaches_solution(tmp_path):
    spec = RunSpec(algorithm="F", variant=1, trajectory="f1.csv")
    run_experiment(spec, out_dir=tmp_path)
    assert float(read_csv(tmp_path / "f1.csv")[-1][-1]) <= 1e-4


def test_five_iteration_normal_advantage():
    zero = run_experiment(RunSpec(algorithm="cond-ext", max_iters=5))
    unit = run_experiment(RunSpec(algorithm="cond-ext", max_iters=5, normal_u="unit", normal_v="unit"))
    assert unit.final_distance < zero.final_distance


def test_max_iters_zero_gives_single_row(tmp_path):
    report = run_experiment(RunSpec(max_iters=0, trajectory="z.csv"), out_dir=tmp_path)
    assert report.termination == "MaxIters"
    assert len(read_csv(tmp_path / "z.csv")) == 2


def test_distance_blank_without_known_solution(tmp_path):
    spec = parse_run_spec(INLINE.replace('name = "box"', 'name = "box"') + "")
    spec = RunSpec(**{**spec.to_dict(), "trajectory": "b.csv", "max_iters": 3})
    run_experiment(spec, out_dir=tmp_path)
    assert all(r[-1] == "" for r in read_csv(tmp_path / "b.csv")[1:])


def test_identical_specs_give_identical_csvs(tmp_path):
    for name in ("a", "b"):
        run_experiment(RunSpec(algorithm="F", variant=3, normal_u="unit", normal_v="unit",
                               trajectory=f"{name}.csv"), out_dir=tmp_path)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_compare_six_variants(tmp_path):
    specs = [RunSpec(algorithm=a, variant=v) for a in "BF" for v in (1, 2, 3)]
    table = compare_runs(specs, table_path="t.csv", out_dir=tmp_path)
    assert len(table) == 6
    assert [r.label for r in table] == [s.run_label for s in specs]
    assert all(r.final_distance >= 0 for r in table)
    assert all(r.final_distance <= 1e-4 for r in table)


def test_compare_twelve_rows_with_and_without_normals(tmp_path):
    specs = []
    for fig in range(3, 9):
        specs += [s for s in figure_pair(fig)]
    table = compare_runs(specs, table_path="t.csv", out_dir=tmp_path, workers=4)
    assert len(table) == 12
    rows = read_csv(tmp_path / "t.csv")
    assert rows[0] == list(table.HEADER) and len(rows) == 13
    for without, with_ in zip(table.rows[::2], table.rows[1::2]):
        assert with_.final_distance < without.final_distance


def test_compare_validation():
    with pytest.raises(ValidationError):
        compare_runs([])
    with pytest.raises(ValidationError):
        compare_runs([RunSpec()])
    with pytest.raises(ValidationError):
        compare_runs([RunSpec(), parse_run_spec(INLINE)])


def test_compare_file(tmp_path):
    p = tmp_path / "cmp.toml"
    p.write_text('table = "cmp.csv"\nmax_iters = 5\n\n[[run]]\nalgorithm = "B"\n\n'
                 '[[run]]\nalgorithm = "B"\nnormal_u = "unit"\nnormal_v = "unit"\n')
    specs, table = load_compare_spec(p)
    assert table == "cmp.csv" and [s.max_iters for s in specs] == [5, 5]
    with pytest.raises(ParseError):
        (tmp_path / "bad.toml").write_text('max_iters = 5\n')
        load_compare_spec(tmp_path / "bad.toml")


def test_run_figures(tmp_path):
    rows = run_figures(tmp_path, max_iters_full=50)
    assert [r["figure"] for r in rows] == list(range(1, 9))
    assert all(r["normals_win"] for r in rows)
    assert (tmp_path / "fig1_with_5it.csv").exists() and (tmp_path / "convergence.csv").exists()
    assert len(read_csv(tmp_path / "fig3_without_5it.csv")) == 7
    assert len(read_csv(tmp_path / "convergence.csv")) == 17
