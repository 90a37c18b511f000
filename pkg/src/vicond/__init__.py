"""Conditional extragradient algorithms for variational inequalities.

Find ``x* in C`` with ``<T(x*), y - x*> >= 0`` for every ``y in C``, using
extragradient steps that add normal vectors of ``C`` to the operator.
"""

from .errors import (ConfigError, DimensionError, DivergenceError, MaxBacktracksError,
                     NotInSetError, ParseError, StalledError, ValidationError, ViError)
from .geometry import (Ball, Box, ConvexSet, Halfspace, Intersection, NormalStrategy,
                       Polyhedron, QuarterDisc, contains, dykstra_project,
                       halfspace_project, intersection_project, normal_cone_sample, project)
from .operators import (Affine, Custom, Rotation, ViOperator, ViProblem, evaluate,
                        example31_problem, reference_solution_example31, residual)
from .linesearch import LinesearchParams, linesearch_boundary, linesearch_feasible
from .solvers import SolveReport, SolverConfig, baseline_extragradient, solve
from .harness import (ComparisonTable, RunSpec, compare_runs, load_run_spec, parse_run_spec,
                      run_experiment, run_figures)

__version__ = "0.1.0"
