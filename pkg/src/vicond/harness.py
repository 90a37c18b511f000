"""Run specs, problem registry, trajectory files and the figure experiments.

A run spec is a small TOML file::

    problem = "example31"
    algorithm = "F"
    variant = 1
    normal_u = "unit"
    normal_v = "unit"
    x0 = [0.0, 1.0]

Inline problems replace the registry name by a table holding a set and an
affine operator::

    [problem]
    name = "box-demo"
    set = { type = "box", lo = [0, 0], hi = [1, 1] }
    operator = { A = [[1, 0], [0, 1]], b = [-2, 0.5] }
"""

from __future__ import annotations

import csv
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from .errors import ConfigError, ParseError, ValidationError, ViError
from .geometry import (ACTIVE_TOL, Ball, Box, Halfspace, NormalStrategy, Polyhedron,
                       QuarterDisc)
from .linesearch import LinesearchParams
from .operators import Affine, ViProblem, example31_problem
from .solvers import ALGORITHMS, SolveReport, SolverConfig, solve, validate_config

log = logging.getLogger(__name__)

PROBLEMS = {"example31": example31_problem}

CSV_TAIL = ("residual", "alpha", "beta", "norm_u", "norm_vbar", "dist_to_solution")


def register_problem(name, factory):
    """Make ``factory()`` available to run specs under ``name``."""
    PROBLEMS[name] = factory


# --------------------------------------------------------------------------
# inline problems
# --------------------------------------------------------------------------

def _set_from_dict(d):
    kind = d.get("type")
    try:
        if kind == "box":
            return Box(d["lo"], d["hi"])
        if kind == "ball":
            return Ball(d["center"], d["radius"])
        if kind == "halfspace":
            return Halfspace(d["a"], d["b"])
        if kind == "polyhedron":
            return Polyhedron(d["A"], d["b"])
        if kind == "quarter-disc":
            return QuarterDisc()
    except KeyError as exc:
        raise ValidationError(f"problem.set: missing field {exc.args[0]!r} for type {kind!r}")
    raise ValidationError(f"problem.set.type: unknown set type {kind!r}")


def _set_to_dict(s):
    if isinstance(s, Box):
        return {"type": "box", "lo": s.lo.tolist(), "hi": s.hi.tolist()}
    if isinstance(s, Ball):
        return {"type": "ball", "center": s.center.tolist(), "radius": float(s.radius)}
    if isinstance(s, Halfspace):
        return {"type": "halfspace", "a": s.a.tolist(), "b": float(s.b)}
    if isinstance(s, Polyhedron):
        return {"type": "polyhedron", "A": s.A.tolist(), "b": s.b.tolist()}
    if isinstance(s, QuarterDisc):
        return {"type": "quarter-disc"}
    raise ValidationError(f"cannot serialize set of type {type(s).__name__}")


def problem_from_dict(d):
    """Build a ``ViProblem`` from an inline description."""
    if not isinstance(d, dict):
        raise ValidationError("problem must be a registry name or a table")
    unknown = set(d) - {"name", "set", "operator", "solution"}
    if unknown:
        raise ValidationError(f"problem: unknown field(s) {sorted(unknown)}")
    if "set" not in d or "operator" not in d:
        raise ValidationError("problem: an inline problem needs 'set' and 'operator'")
    op = d["operator"]
    if not {"A", "b"} <= set(op):
        raise ValidationError("problem.operator: needs 'A' and 'b'")
    try:
        return ViProblem(
            set=_set_from_dict(d["set"]),
            op=Affine(op["A"], op["b"], op.get("lipschitz")),
            known_solution=d.get("solution"),
            name=d.get("name", "inline"),
        )
    except ValidationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"problem: {exc}") from exc


def problem_to_dict(problem):
    """Inverse of ``problem_from_dict`` for affine problems."""
    op = problem.op
    if not isinstance(op, Affine):
        raise ValidationError("only affine operators can be written inline")
    out = {"name": problem.name, "set": _set_to_dict(problem.set),
           "operator": {"A": op.A.tolist(), "b": op.b.tolist()}}
    if op.lipschitz is not None:
        out["operator"]["lipschitz"] = op.lipschitz
    if problem.known_solution is not None:
        out["solution"] = problem.known_solution.tolist()
    return out


# --------------------------------------------------------------------------
# run specs
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=True)
class RunSpec:
    """Everything needed to reproduce one solver run."""

    problem: Union[str, dict] = "example31"
    algorithm: str = "F"
    variant: int = 1
    normal_u: str = "zero"
    normal_v: str = "zero"
    beta: float = 0.25
    sigma: float = 1.0
    delta: float = 0.5
    theta: float = 0.5
    cap_M: float = 1.0
    max_backtracks: int = 60
    tol: float = 1e-8
    max_iters: int = 10_000
    x0: tuple = (0.0, 1.0)
    project_start: bool = False
    seed: int = 0
    trajectory: Optional[str] = None
    report: Optional[str] = None
    label: Optional[str] = None

    __hash__ = None

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(t) for t in self.x0))
        if self.algorithm not in ALGORITHMS:
            raise ValidationError(f"algorithm: expected one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.variant not in (1, 2, 3):
            raise ValidationError(f"variant: expected 1, 2 or 3, got {self.variant!r}")
        if not isinstance(self.max_iters, int) or self.max_iters < 0:
            raise ValidationError("max_iters: must be a nonnegative integer")
        if not self.tol > 0:
            raise ValidationError("tol: must be positive")
        problem = self.build_problem()
        try:
            config = self.solver_config()
            validate_config(config, problem)
        except ValidationError:
            raise
        except (ConfigError, ValueError) as exc:
            raise ValidationError(str(exc)) from exc
        x0 = np.array(self.x0)
        if x0.shape != (problem.dim,):
            raise ValidationError(f"x0: expected {problem.dim} coordinates, got {len(self.x0)}")
        if not self.project_start and not problem.set.contains(x0, ACTIVE_TOL):
            raise ValidationError("x0: not in the feasible set (set project_start = true to project it)")

    def build_problem(self):
        if isinstance(self.problem, str):
            if self.problem not in PROBLEMS:
                raise ValidationError(f"problem: unknown name {self.problem!r}; known: {sorted(PROBLEMS)}")
            return PROBLEMS[self.problem]()
        return problem_from_dict(self.problem)

    def solver_config(self):
        ls = LinesearchParams(sigma=self.sigma, delta=self.delta, theta=self.theta,
                              cap=self.cap_M, max_backtracks=self.max_backtracks)
        return SolverConfig(
            algorithm=self.algorithm, variant=self.variant, ls=ls, beta=self.beta,
            normal_u=NormalStrategy.parse(self.normal_u, self.cap_M),
            normal_v=NormalStrategy.parse(self.normal_v, self.cap_M),
            tol=self.tol, max_iters=self.max_iters)

    @property
    def run_label(self):
        return self.label or self.solver_config().label

    def to_dict(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            out[f.name] = list(value) if f.name == "x0" else value
        return out


_FIELD_TYPES = {f.name: f.type for f in fields(RunSpec)}


def _coerce(name, value):
    kind = _FIELD_TYPES[name]
    if name == "problem":
        if not isinstance(value, (str, dict)):
            raise ParseError(f"field 'problem': expected a name or a table")
        return value
    if name == "x0":
        if isinstance(value, str):
            value = [t for t in value.split(",") if t.strip()]
        try:
            return tuple(float(t) for t in value)
        except (TypeError, ValueError):
            raise ParseError(f"field 'x0': expected a list of numbers, got {value!r}")
    if name == "project_start":
        if not isinstance(value, bool):
            raise ParseError(f"field 'project_start': expected true or false, got {value!r}")
        return value
    try:
        if kind == "int" or name in ("variant", "max_iters", "max_backtracks", "seed"):
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            return int(value)
        if kind == "float" or name in ("beta", "sigma", "delta", "theta", "cap_M", "tol"):
            if isinstance(value, bool):
                raise ValueError
            return float(value)
    except (TypeError, ValueError):
        raise ParseError(f"field {name!r}: cannot read {value!r} as a number")
    if not isinstance(value, str):
        raise ParseError(f"field {name!r}: expected a string, got {value!r}")
    return value


def run_spec_from_dict(d, defaults=None, where="spec"):
    """Build a ``RunSpec`` from a mapping; ``defaults`` fill missing keys."""
    merged = dict(defaults or {})
    merged.update(d)
    if "beta_hat" in merged:
        if "beta" in d and "beta_hat" in d:
            raise ParseError(f"{where}: give either 'beta' or its alias 'beta_hat', not both")
        merged["beta"] = merged.pop("beta_hat")
    unknown = set(merged) - set(_FIELD_TYPES)
    if unknown:
        raise ParseError(f"{where}: unknown field(s) {sorted(unknown)}")
    kwargs = {k: _coerce(k, v) for k, v in merged.items()}
    return RunSpec(**kwargs)


def _parse_toml(text, source):
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{source}: {exc}") from exc


def parse_run_spec(text, source="<string>"):
    return run_spec_from_dict(_parse_toml(text, source), where=source)


def load_run_spec(path):
    """Read and validate a run spec; unset fields take their defaults."""
    path = Path(path)
    return parse_run_spec(path.read_text(), str(path))


def dump_run_spec(spec):
    """TOML text that ``parse_run_spec`` turns back into ``spec``."""
    return tomli_w.dumps(spec.to_dict())


# --------------------------------------------------------------------------
# running
# --------------------------------------------------------------------------

def _fmt(value):
    value = float(value)
    if math.isnan(value):
        return ""
    return format(value, ".17g")


def trajectory_rows(report, n):
    header = ["k"] + [f"x_{i + 1}" for i in range(n)] + list(CSV_TAIL)
    rows = [header]
    for rec in report.trajectory:
        rows.append([str(rec.k)] + [_fmt(t) for t in rec.x] +
                    [_fmt(rec.residual), _fmt(rec.alpha), _fmt(rec.beta), _fmt(rec.norm_u),
                     _fmt(rec.norm_vbar), _fmt(rec.dist_to_solution)])
    return rows


def write_trajectory_csv(report, path, n):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(trajectory_rows(report, n))


def report_dict(spec, report, elapsed):
    return {
        "label": spec.run_label,
        "problem": spec.problem if isinstance(spec.problem, str) else spec.problem.get("name", "inline"),
        "termination": report.termination,
        "message": report.message,
        "iterations": report.iterations,
        "final_x": [float(t) for t in report.final_x],
        "final_residual": _json_float(report.final_residual),
        "final_distance": _json_float(report.final_distance),
        "wall_time": elapsed,
        "spec": spec.to_dict(),
    }


def _json_float(value):
    value = float(value)
    return None if math.isnan(value) else value


def run_experiment(spec, out_dir=None):
    """Solve the spec's problem and write its trajectory CSV and JSON report.

    Relative output paths resolve against ``out_dir`` when given. Errors
    raised by the solver become the report's termination rather than
    propagating. Returns the ``SolveReport``; the wall time is in the JSON.
    """
    report, elapsed = _execute(spec)
    _write_outputs(spec, report, elapsed, out_dir)
    return report


def _execute(spec):
    problem = spec.build_problem()
    x0 = np.array(spec.x0)
    t0 = time.perf_counter()
    try:
        report = solve(problem, spec.solver_config(), x0)
    except ViError as exc:
        log.warning("run %s failed: %s", spec.run_label, exc)
        x = problem.set.project(x0)
        report = SolveReport([], type(exc).__name__, x, spec.run_label, str(exc))
    return report, time.perf_counter() - t0


def _resolve(path, out_dir):
    if path is None:
        return None
    path = Path(path)
    if out_dir is not None and not path.is_absolute():
        path = Path(out_dir) / path
    return path


def _write_outputs(spec, report, elapsed, out_dir):
    traj = _resolve(spec.trajectory, out_dir)
    if traj is not None:
        write_trajectory_csv(report, traj, len(spec.x0))
    rep = _resolve(spec.report, out_dir)
    if rep is not None:
        rep.parent.mkdir(parents=True, exist_ok=True)
        rep.write_text(json.dumps(report_dict(spec, report, elapsed), indent=2) + "\n")


# --------------------------------------------------------------------------
# comparisons
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonRow:
    label: str
    iterations: int
    final_residual: float
    final_distance: float
    wall_time: float
    termination: str


@dataclass
class ComparisonTable:
    rows: list = field(default_factory=list)

    HEADER = ("label", "iterations", "final_residual", "final_distance", "wall_time", "termination")

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def to_csv(self, path, timings=True):
        # timings differ between runs; drop them for byte-stable tables
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.HEADER)
            for r in self.rows:
                w.writerow([r.label, r.iterations, _fmt(r.final_residual), _fmt(r.final_distance),
                            _fmt(r.wall_time) if timings else "", r.termination])


def compare_runs(specs, table_path=None, out_dir=None, workers=1):
    """Run every spec and tabulate the results in the given order.

    The specs must share one problem. With ``workers > 1`` runs execute on a
    thread pool; files are written afterwards, one run at a time.
    """
    specs = list(specs)
    if len(specs) < 2:
        raise ValidationError("compare_runs needs at least two specs")
    first = specs[0].problem
    if any(s.problem != first for s in specs[1:]):
        raise ValidationError("compare_runs: all specs must use the same problem")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(_execute, specs))
    else:
        results = [_execute(s) for s in specs]
    table = ComparisonTable()
    for spec, (report, elapsed) in zip(specs, results):
        _write_outputs(spec, report, elapsed, out_dir)
        table.rows.append(ComparisonRow(spec.run_label, report.iterations, report.final_residual,
                                        report.final_distance, elapsed, report.termination))
    if table_path is not None:
        table.to_csv(_resolve(table_path, out_dir))
    return table


def load_compare_spec(path):
    """Read a comparison file: shared keys at top level, one ``[[run]]`` per row.

    Returns ``(specs, table_path)``; ``table`` names the output table.
    """
    path = Path(path)
    data = _parse_toml(path.read_text(), str(path))
    runs = data.pop("run", None)
    table = data.pop("table", None)
    if not isinstance(runs, list) or not runs:
        raise ParseError(f"{path}: expected one or more [[run]] tables")
    specs = [run_spec_from_dict(r, defaults=data, where=f"{path}: run {i + 1}")
             for i, r in enumerate(runs)]
    return specs, table


# --------------------------------------------------------------------------
# figure experiments
# --------------------------------------------------------------------------

#: figure number -> (algorithm, variant) of the run without normals
FIGURES = {
    1: ("baseline-a", 1), 2: ("cond-ext", 1),
    3: ("B", 1), 4: ("B", 2), 5: ("B", 3),
    6: ("F", 1), 7: ("F", 2), 8: ("F", 3),
}
FIGURE_ITERS = 5


def figure_pair(fig, max_iters=FIGURE_ITERS, **overrides):
    """The (without, with) normal-vector run specs behind figure ``fig``.

    Figure 1 sets classical extragradient against the conditional method
    with unit normals; the rest toggle normals within one method.
    """
    algorithm, variant = FIGURES[fig]
    common = dict(problem="example31", variant=variant, max_iters=max_iters, **overrides)
    tag = "5it" if max_iters == FIGURE_ITERS else "full"
    without = RunSpec(algorithm=algorithm, **common,
                      trajectory=f"fig{fig}_without_{tag}.csv")
    with_alg = "cond-ext" if fig == 1 else algorithm
    with_ = RunSpec(algorithm=with_alg, normal_u="unit", normal_v="unit", **common,
                    trajectory=f"fig{fig}_with_{tag}.csv")
    return without, with_


def run_figures(out_dir, max_iters_full=10_000):
    """Write the figure trajectories and two tables into ``out_dir``.

    ``figures.csv`` lists the five-iteration distances of each pair and
    whether normals won; ``convergence.csv`` runs every configuration to
    convergence. Returns the rows of ``figures.csv`` as dicts.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    full = []
    for fig in FIGURES:
        pair = figure_pair(fig)
        reports = [run_experiment(s, out_dir) for s in pair]
        d0, d1 = (r.final_distance for r in reports)
        rows.append({"figure": fig, "without": pair[0].run_label, "with": pair[1].run_label,
                     "dist_without": d0, "dist_with": d1, "normals_win": bool(d1 < d0)})
        full += [replace(s, max_iters=max_iters_full, tol=1e-10,
                         trajectory=s.trajectory.replace("5it", "full"))
                 for s in figure_pair(fig)]
    with open(out_dir / "figures.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["figure", "without", "with", "dist_without", "dist_with", "normals_win"])
        for r in rows:
            w.writerow([r["figure"], r["without"], r["with"], _fmt(r["dist_without"]),
                        _fmt(r["dist_with"]), str(r["normals_win"]).lower()])
    compare_runs(full, table_path="convergence.csv", out_dir=out_dir)
    return rows
