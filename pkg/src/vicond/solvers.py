"""Iteration drivers for the conditional extragradient family.

Algorithms
----------
``cond-ext``
    constant-step extragradient with normal vectors in both projections.
``B``
    boundary linesearch, then a projection step built from the halfspace
    ``H(z, alpha v)``.
``F``
    feasible-direction linesearch, then a projection step built from
    ``H(xbar, v)`` with ``xbar = alpha z + (1 - alpha) x``.
``baseline-a``, ``baseline-b``, ``baseline-c``, ``baseline-konnov``
    the classical extragradient stepsize strategies (see :mod:`.baselines`).

The projection step has three variants. With ``x`` the iterate and ``x0``
the starting point:

1. ``P_C(P_H(x))``
2. ``P_{C∩H}(x)``
3. ``P_{C∩H∩W(x)}(x0)``, ``W(x) = {y : <y - x, x0 - x> <= 0}``
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, DivergenceError, MaxBacktracksError, StalledError
from .geometry import (ACTIVE_TOL, Halfspace, NormalStrategy, halfspace_project,
                       intersection_project, normal_cone_sample)
from .linesearch import LinesearchParams, linesearch_boundary, linesearch_feasible
from .operators import ViProblem, evaluate, residual

log = logging.getLogger(__name__)

ALGORITHMS = ("cond-ext", "B", "F", "baseline-a", "baseline-b", "baseline-c", "baseline-konnov")
MAX_HALVINGS = 60
DEGENERATE_TOL = 1e-14

# termination reasons
RESIDUAL_MET = "ResidualMet"
FIXED_POINT = "FixedPoint"
MAX_ITERS = "MaxIters"
LINESEARCH_STALLED = "LinesearchStalled"
DIVERGENCE = "DivergenceError"


@dataclass(frozen=True)
class SolverConfig:
    """Algorithm choice and parameters.

    ``beta`` is either a constant or a finite sequence that is cycled; its
    range plays the role of ``[beta_min, beta_max]``. ``None`` means 1 for
    the linesearch methods and is an error for the constant-step ones.
    """

    algorithm: str = "F"
    variant: int = 1
    ls: LinesearchParams = field(default_factory=LinesearchParams)
    beta: Union[None, float, Sequence[float]] = None
    normal_u: NormalStrategy = field(default_factory=NormalStrategy.zero)
    normal_v: NormalStrategy = field(default_factory=NormalStrategy.zero)
    tol: float = 1e-10
    max_iters: int = 10_000

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.variant not in (1, 2, 3):
            raise ConfigError("variant must be 1, 2 or 3")
        if self.beta is not None and not np.isscalar(self.beta):
            object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
            if not self.beta:
                raise ConfigError("beta sequence must be nonempty")
        lo, _ = self.beta_bounds
        if not lo > 0:
            raise ConfigError("stepsizes beta must be positive")
        if not self.tol >= 0:
            raise ConfigError("tol must be nonnegative")
        if self.max_iters < 0:
            raise ConfigError("max_iters must be nonnegative")

    @property
    def beta_bounds(self):
        if self.beta is None:
            return (1.0, 1.0)
        if np.isscalar(self.beta):
            return (float(self.beta), float(self.beta))
        return (min(self.beta), max(self.beta))

    def beta_at(self, k):
        if self.beta is None:
            return 1.0
        if np.isscalar(self.beta):
            return float(self.beta)
        return self.beta[k % len(self.beta)]

    @property
    def label(self):
        if self.algorithm in ("B", "F"):
            name = f"{self.algorithm}.{self.variant}"
        else:
            name = self.algorithm
        return f"{name}[u={self.normal_u},v={self.normal_v}]"


def validate_config(config, problem):
    """Raise ``ConfigError`` if ``config`` cannot run on ``problem``."""
    lip = problem.op.lipschitz
    _, beta_max = config.beta_bounds
    if config.algorithm in ("cond-ext", "baseline-a"):
        if config.beta is None:
            raise ConfigError(f"{config.algorithm} needs an explicit stepsize beta")
        if lip is None:
            raise ConfigError(f"{config.algorithm} needs an operator with a Lipschitz constant")
    if config.algorithm == "cond-ext" and not beta_max < 1 / (lip + 1):
        raise ConfigError(
            f"cond-ext needs beta_max < 1/(L+1) = {1 / (lip + 1):.6g}, got {beta_max}")
    if config.algorithm == "baseline-a" and lip > 0 and not beta_max < 1 / lip:
        raise ConfigError(f"baseline-a needs beta_max < 1/L = {1 / lip:.6g}, got {beta_max}")
    if config.algorithm in ("B", "F"):
        for name, s in (("normal_u", config.normal_u), ("normal_v", config.normal_v)):
            if s.length > config.ls.cap:
                raise ConfigError(f"{name} length {s.length} exceeds the cap M = {config.ls.cap}")


@dataclass(frozen=True)
class StepInfo:
    """Diagnostics of the step that produced the current iterate."""

    beta: float = np.nan
    alpha: float = np.nan
    z: Optional[np.ndarray] = None
    u: Optional[np.ndarray] = None
    vbar: Optional[np.ndarray] = None
    xbar: Optional[np.ndarray] = None
    halfspace: Optional[Halfspace] = None
    backtracks: int = 0
    # set when H degenerates: z (or xbar) is then certified as a solution
    certificate: bool = False


@dataclass(frozen=True)
class IterateState:
    k: int
    x: np.ndarray
    x0: np.ndarray
    last: Optional[StepInfo] = None


@dataclass(frozen=True)
class IterRecord:
    k: int
    x: np.ndarray
    residual: float
    alpha: float = np.nan
    beta: float = np.nan
    norm_u: float = np.nan
    norm_vbar: float = np.nan
    dist_to_solution: float = np.nan


@dataclass
class SolveReport:
    trajectory: list
    termination: str
    final_x: np.ndarray
    label: str = ""
    message: str = ""
    states: list = field(default_factory=list, repr=False)

    @property
    def iterations(self):
        return self.trajectory[-1].k

    @property
    def final_residual(self):
        return self.trajectory[-1].residual

    @property
    def final_distance(self):
        return self.trajectory[-1].dist_to_solution

    @property
    def xs(self):
        return np.array([r.x for r in self.trajectory])


# --------------------------------------------------------------------------
# halfspaces
# --------------------------------------------------------------------------


def build_halfspace_H(z, v, op):
    """``H(z, v) = {y : <T(z) + v, y - z> <= 0}``; whole space if ``T(z) + v = 0``."""
    z = np.asarray(z, dtype=float)
    a = evaluate(op, z) + np.asarray(v, dtype=float)
    if np.linalg.norm(a) <= DEGENERATE_TOL:
        return Halfspace.whole_space(z.shape[0])
    return Halfspace(a, float(a @ z))


def build_halfspace_W(x, x0):
    """``W(x) = {y : <y - x, x0 - x> <= 0}``; whole space when ``x = x0``."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(x0, dtype=float) - x
    if not np.any(a):
        return Halfspace.whole_space(x.shape[0])
    return Halfspace(a, float(a @ x))


# --------------------------------------------------------------------------
# steps
# --------------------------------------------------------------------------


def _snap(cset, x):
    # removes feasibility drift left by Dykstra; moves x by at most ~1e-10
    return cset.project(x)


def projection_step(problem, variant, x, x0, H):
    C = problem.set
    if variant == 1:
        return C.project(halfspace_project(H, x))
    if variant == 2:
        return _snap(C, intersection_project([C, H], x))
    W = build_halfspace_W(x, x0)
    return _snap(C, intersection_project([C, H, W], x0))


def cond_ext_step(state, problem, config):
    """One step of the constant-step conditional extragradient method.

    ``u`` is halved until ``|u| <= delta |x - z(u)|`` and ``v`` until
    ``|v - u| <= |x - z|``; both loops end since the conditions hold in the
    limit of a zero normal at non-solutions.
    """
    C, op = problem.set, problem.op
    x = state.x
    beta = config.beta_at(state.k)
    delta = config.ls.delta
    Tx = evaluate(op, x)
    u = normal_cone_sample(C, x, config.normal_u)
    for _ in range(MAX_HALVINGS + 1):
        z = C.project(x - beta * (Tx + u))
        gap = np.linalg.norm(x - z)
        if np.linalg.norm(u) <= delta * gap:
            break
        u = u / 2
    else:
        raise StalledError("could not damp u to satisfy |u| <= delta |x - z|")
    v = normal_cone_sample(C, z, config.normal_v)
    for _ in range(MAX_HALVINGS + 1):
        if np.linalg.norm(v - u) <= gap:
            break
        v = v / 2
    else:
        raise StalledError("could not damp v to satisfy |v - u| <= |x - z|")
    x_new = C.project(x - beta * (evaluate(op, z) + v))
    info = StepInfo(beta=beta, alpha=1.0, z=z, u=u, vbar=v)
    return IterateState(state.k + 1, x_new, state.x0, info)


def conceptual_B_step(state, problem, config):
    C, op = problem.set, problem.op
    x = state.x
    u = normal_cone_sample(C, x, config.normal_u)
    out = linesearch_boundary(C, op, x, u, config.ls, config.normal_v)
    vbar = out.alpha * out.v
    H = build_halfspace_H(out.z, vbar, op)
    info = StepInfo(alpha=out.alpha, z=out.z, u=u, vbar=vbar, halfspace=H,
                    backtracks=out.backtracks, certificate=H.degenerate)
    if H.degenerate:
        return IterateState(state.k + 1, out.z, state.x0, info)
    x_new = projection_step(problem, config.variant, x, state.x0, H)
    return IterateState(state.k + 1, x_new, state.x0, info)


def conceptual_F_step(state, problem, config):
    C, op = problem.set, problem.op
    x = state.x
    beta = config.beta_at(state.k)
    u = normal_cone_sample(C, x, config.normal_u)
    out = linesearch_feasible(C, op, x, u, beta, config.ls, config.normal_v)
    xbar = out.alpha * out.z + (1 - out.alpha) * x
    H = build_halfspace_H(xbar, out.v, op)
    info = StepInfo(beta=beta, alpha=out.alpha, z=out.z, u=u, vbar=out.v, xbar=xbar,
                    halfspace=H, backtracks=out.backtracks, certificate=H.degenerate)
    if H.degenerate:
        return IterateState(state.k + 1, xbar, state.x0, info)
    x_new = projection_step(problem, config.variant, x, state.x0, H)
    return IterateState(state.k + 1, x_new, state.x0, info)


def _step_function(algorithm):
    from . import baselines

    return {
        "cond-ext": cond_ext_step,
        "B": conceptual_B_step,
        "F": conceptual_F_step,
        "baseline-a": baselines.strategy_a_step,
        "baseline-b": baselines.strategy_b_step,
        "baseline-c": baselines.strategy_c_step,
        "baseline-konnov": baselines.konnov_step,
    }[algorithm]


# --------------------------------------------------------------------------
# driver
# --------------------------------------------------------------------------


def _record(problem, state, res):
    info = state.last
    xs = problem.known_solution
    dist = float(np.linalg.norm(state.x - xs)) if xs is not None else np.nan
    if info is None:
        return IterRecord(state.k, state.x, res, dist_to_solution=dist)
    norm = lambda a: float(np.linalg.norm(a)) if a is not None else np.nan
    return IterRecord(state.k, state.x, res, info.alpha, info.beta,
                      norm(info.u), norm(info.vbar), dist)


def solve(problem: ViProblem, config: SolverConfig, x0=None, keep_states=False):
    """Run ``config.algorithm`` on ``problem`` from ``x0``.

    Stops when the residual ``|x - P_C(x - T(x))|`` drops to ``config.tol``
    (``ResidualMet``), when an update moves the iterate by at most
    ``config.tol`` (``FixedPoint``), or after ``config.max_iters`` updates.
    Linesearch breakdowns and Dykstra failures end the run with the
    corresponding termination instead of raising.
    """
    validate_config(config, problem)
    C = problem.set
    if x0 is None:
        raise ConfigError("a starting point x0 is required")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (C.dim,):
        raise ConfigError(f"x0 must have length {C.dim}")
    if not C.contains(x0, ACTIVE_TOL):
        log.info("x0 = %s is infeasible; projecting it onto C", x0)
        x0 = C.project(x0)
    step = _step_function(config.algorithm)

    state = IterateState(0, x0, x0)
    res = residual(problem, x0)
    records = [_record(problem, state, res)]
    states = [state]
    termination, message = MAX_ITERS, ""
    while True:
        if res <= config.tol:
            termination = RESIDUAL_MET
            break
        if state.k >= config.max_iters:
            termination = MAX_ITERS
            break
        try:
            new = step(state, problem, config)
        except MaxBacktracksError as exc:
            # a trial point equal to x means x = P_C(x - beta T(x)) in floating point
            termination = FIXED_POINT if exc.stationary else LINESEARCH_STALLED
            message = str(exc)
            break
        except StalledError as exc:
            termination, message = LINESEARCH_STALLED, str(exc)
            break
        except DivergenceError as exc:
            termination, message = DIVERGENCE, str(exc)
            break
        moved = float(np.linalg.norm(new.x - state.x))
        state = new
        res = residual(problem, state.x)
        records.append(_record(problem, state, res))
        if keep_states:
            states.append(state)
        if state.last.certificate:
            termination, message = RESIDUAL_MET, "degenerate halfspace certifies a solution"
            break
        if moved <= config.tol and res > config.tol:
            termination = FIXED_POINT
            break
    return SolveReport(records, termination, state.x, config.label, message,
                       states if keep_states else [])


def baseline_extragradient(problem, strategy, config, x0):
    """Classical extragradient with stepsize strategy ``a``, ``b``, ``c`` or ``konnov``."""
    strategy = strategy.lower()
    if strategy not in ("a", "b", "c", "konnov"):
        raise ConfigError(f"unknown baseline strategy {strategy!r}")
    return solve(problem, replace(config, algorithm=f"baseline-{strategy}"), x0)
