"""Classical extragradient steps, written out without normal vectors.

Each step takes ``y`` from a stepsize rule and updates
``x+ = P_C(x - gamma T(y))``. Strategy ``a`` uses ``gamma = beta``; the
others use ``gamma = <T(y), x - y> / |T(y)|^2``.

These are kept independent of the conditional code paths on purpose: the
test-suite checks that zero normals reduce the conditional methods to them.
"""

import numpy as np

from .errors import MaxBacktracksError
from .operators import evaluate
from .solvers import IterateState, StepInfo


def _gamma_update(C, op, x, y):
    Ty = evaluate(op, y)
    gamma = float(Ty @ (x - y)) / float(Ty @ Ty)
    return C.project(x - gamma * Ty)


def strategy_a_step(state, problem, config):
    """Constant stepsizes: ``z = P_C(x - beta T(x))``, ``x+ = P_C(x - beta T(z))``."""
    C, op = problem.set, problem.op
    x = state.x
    beta = config.beta_at(state.k)
    z = C.project(x - beta * evaluate(op, x))
    x_new = C.project(x - beta * evaluate(op, z))
    return IterateState(state.k + 1, x_new, state.x0, StepInfo(beta=beta, alpha=1.0, z=z))


def strategy_b_step(state, problem, config):
    """Armijo search on the boundary: shrink ``beta`` from ``sigma`` until
    ``beta |T(x) - T(y)| <= delta |x - y|`` with ``y = P_C(x - beta T(x))``."""
    C, op = problem.set, problem.op
    x = state.x
    ls = config.ls
    Tx = evaluate(op, x)
    beta = ls.sigma
    for j in range(ls.max_backtracks + 1):
        y = C.project(x - beta * Tx)
        gap = np.linalg.norm(x - y)
        if gap == 0:
            raise MaxBacktracksError("y = x: numerically a solution", point=y, stationary=True)
        if beta * np.linalg.norm(Tx - evaluate(op, y)) <= ls.delta * gap:
            break
        if j < ls.max_backtracks:
            beta *= ls.theta
    else:
        raise MaxBacktracksError("strategy (b) search exhausted", point=y)
    x_new = _gamma_update(C, op, x, y)
    return IterateState(state.k + 1, x_new, state.x0,
                        StepInfo(beta=beta, alpha=1.0, z=y, backtracks=j))


def _feasible_direction_step(state, problem, config, konnov):
    C, op = problem.set, problem.op
    x = state.x
    ls = config.ls
    beta = config.beta_at(state.k)
    Tx = evaluate(op, x)
    p = C.project(x - beta * Tx)
    d = x - p
    if not np.any(d):
        raise MaxBacktracksError("P_C(x - beta T(x)) = x: numerically a solution",
                                 point=p, stationary=True)
    rhs = ls.delta * float(Tx @ d) if konnov else ls.delta / beta * float(d @ d)
    alpha = 1.0
    for j in range(ls.max_backtracks + 1):
        y = alpha * p + (1 - alpha) * x
        if float(evaluate(op, y) @ d) >= rhs:
            break
        if j < ls.max_backtracks:
            alpha *= ls.theta
    else:
        raise MaxBacktracksError("strategy (c) search exhausted", point=y)
    x_new = _gamma_update(C, op, x, y)
    return IterateState(state.k + 1, x_new, state.x0,
                        StepInfo(beta=beta, alpha=alpha, z=p, xbar=y, backtracks=j))


def strategy_c_step(state, problem, config):
    """Armijo search along ``P_C(x - beta T(x)) - x`` with the test
    ``<T(y), x - p> >= (delta / beta) |x - p|^2``."""
    return _feasible_direction_step(state, problem, config, konnov=False)


def konnov_step(state, problem, config):
    """Strategy (c) with the test ``<T(y), x - p> >= delta <T(x), x - p>``."""
    return _feasible_direction_step(state, problem, config, konnov=True)
