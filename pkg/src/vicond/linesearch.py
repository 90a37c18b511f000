"""Armijo-type backtracking searches that use normal vectors of the feasible set.

Both searches return a stepsize, a trial point ``z`` in C and a normal vector
``v``. Together they define a halfspace that separates the current iterate
from the solution set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MaxBacktracksError, NotInSetError
from .geometry import ACTIVE_TOL, NormalStrategy, normal_cone_sample
from .operators import evaluate

#: trial points closer than this to the base point count as stationary
STATIONARY_TOL = 1e-14


@dataclass(frozen=True)
class LinesearchParams:
    sigma: float = 1.0
    delta: float = 0.5
    theta: float = 0.5
    cap: float = 1.0
    max_backtracks: int = 60

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if not self.cap >= 0:
            raise ValueError("cap M must be nonnegative")
        if self.max_backtracks < 0:
            raise ValueError("max_backtracks must be nonnegative")


@dataclass(frozen=True)
class LinesearchOutcome:
    alpha: float
    z: np.ndarray
    v: np.ndarray
    backtracks: int


def _check_base(cset, x, u, params, normal):
    if not cset.contains(x, ACTIVE_TOL):
        raise NotInSetError(f"{x} is not in the feasible set")
    if normal.length > params.cap:
        raise ValueError(f"normal strategy length {normal.length} exceeds the cap M = {params.cap}")
    if np.linalg.norm(u) > params.cap * (1 + 1e-12):
        raise ValueError(f"|u| = {np.linalg.norm(u):.6g} exceeds the cap M = {params.cap}")


def linesearch_boundary(cset, op, x, u, params=LinesearchParams(),
                        normal=NormalStrategy.zero()):
    """Backtrack on the boundary of C.

    Tries ``alpha = sigma, sigma*theta, ...`` with
    ``z = P_C(x - alpha (T(x) + alpha u))`` and ``v`` the normal picked at
    ``z``, and accepts the first ``alpha`` with
    ``alpha |T(z) - T(x) + alpha v - alpha u| <= delta |z - x|``.
    Every trial costs one projection.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_base(cset, x, u, params, normal)
    Tx = evaluate(op, x)
    alpha = params.sigma
    for j in range(params.max_backtracks + 1):
        z = cset.project(x - alpha * (Tx + alpha * u))
        gap = np.linalg.norm(z - x)
        if gap <= STATIONARY_TOL:
            raise MaxBacktracksError(
                "trial point equals the base point; x is numerically a solution",
                point=z, alpha=alpha, stationary=True)
        v = normal_cone_sample(cset, z, normal)
        lhs = alpha * np.linalg.norm(evaluate(op, z) - Tx + alpha * v - alpha * u)
        if lhs <= params.delta * gap:
            return LinesearchOutcome(alpha, z, v, j)
        if j < params.max_backtracks:
            alpha *= params.theta
    raise MaxBacktracksError(
        f"linesearch B did not accept within {params.max_backtracks} backtracks",
        point=z, alpha=alpha)


def linesearch_feasible(cset, op, x, u, beta, params=LinesearchParams(),
                        normal=NormalStrategy.zero()):
    """Backtrack along the feasible direction ``z - x``.

    ``z = P_C(x - beta (T(x) + alpha u))`` and ``v`` is picked at
    ``xbar = alpha z + (1 - alpha) x``; accepts the first
    ``alpha = 1, theta, theta^2, ...`` with
    ``<T(xbar) + v, x - z> >= delta <T(x) + alpha u, x - z>``.
    With ``u = 0`` the projection is computed once.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    _check_base(cset, x, u, params, normal)
    Tx = evaluate(op, x)
    fixed_z = not np.any(u)
    z = None
    alpha = 1.0
    for j in range(params.max_backtracks + 1):
        if z is None or not fixed_z:
            z = cset.project(x - beta * (Tx + alpha * u))
            if np.linalg.norm(z - x) <= STATIONARY_TOL:
                raise MaxBacktracksError(
                    "trial point equals the base point; x is numerically a solution",
                    point=z, alpha=alpha, stationary=True)
        d = x - z
        xbar = alpha * z + (1 - alpha) * x
        v = normal_cone_sample(cset, xbar, normal)
        if (evaluate(op, xbar) + v) @ d >= params.delta * ((Tx + alpha * u) @ d):
            return LinesearchOutcome(alpha, z, v, j)
        if j < params.max_backtracks:
            alpha *= params.theta
    raise MaxBacktracksError(
        f"linesearch F did not accept within {params.max_backtracks} backtracks",
        point=z, alpha=alpha)
