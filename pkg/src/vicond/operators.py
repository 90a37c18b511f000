"""VI operators, problems, and the rotation-operator reference problem.

The reference problem lives on the quarter disc with the operator
``T = R - Id``, where ``R`` rotates by -pi/2 about ``(1/2, 1)``. ``T`` is
never monotone (``<T(y) - T(x), y - x> = -|y - x|^2``) yet its unique
solution also solves the dual problem, so every algorithm here applies.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, NotInSetError
from .geometry import ACTIVE_TOL, ConvexSet, QuarterDisc, _vec


class ViOperator:
    """A continuous map ``T: R^n -> R^n`` with optional Lipschitz metadata."""

    lipschitz: Optional[float] = None
    dim: Optional[int] = None

    def __call__(self, x):
        return evaluate(self, x)

    def _apply(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class Affine(ViOperator):
    """``T(x) = A x + b``."""

    A: np.ndarray
    b: np.ndarray
    lipschitz: Optional[float] = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        b = _vec(self.b, "b")
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] != b.shape[0]:
            raise DimensionError(f"need square A matching b, got {A.shape} and {b.shape}")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.lipschitz is not None:
            lip = float(self.lipschitz)
            if lip < 0:
                raise ValueError("Lipschitz constant must be nonnegative")
            if lip < spectral_norm(A) * (1 - 1e-9):
                raise ValueError(
                    f"declared Lipschitz constant {lip} is below the spectral norm "
                    f"{spectral_norm(A):.6g} of A")
            object.__setattr__(self, "lipschitz", lip)

    @property
    def dim(self):
        return self.b.shape[0]

    def _apply(self, x):
        return self.A @ x + self.b


@dataclass(frozen=True)
class Rotation(ViOperator):
    """Planar rotation by ``angle`` about ``center``; ``R - Id`` when ``shift``.

    Uses the clockwise-positive convention
    ``R(x) = [[cos g, sin g], [-sin g, cos g]] (x - B) + B``.
    """

    angle: float
    center: np.ndarray
    shift: bool = True
    lipschitz: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        if self.center.shape != (2,):
            raise DimensionError("rotation center must be 2-D")
        if self.lipschitz is not None:
            lip = float(self.lipschitz)
            if lip < spectral_norm(self.to_affine().A) * (1 - 1e-9):
                raise ValueError("declared Lipschitz constant is below the sharp one")
            object.__setattr__(self, "lipschitz", lip)

    dim = 2

    @cached_property
    def matrix(self):
        c, s = np.cos(self.angle), np.sin(self.angle)
        return np.array([[c, s], [-s, c]])

    def _apply(self, x):
        y = self.matrix @ (x - self.center) + self.center
        return y - x if self.shift else y

    def to_affine(self):
        R = self.matrix
        if self.shift:
            A = R - np.eye(2)
        else:
            A = R
        b = self.center - R @ self.center
        return Affine(A, b, self.lipschitz)


@dataclass(frozen=True)
class Custom(ViOperator):
    """Wraps a callable. The callable must be pure; nothing is verified."""

    func: Callable
    dim: Optional[int] = None
    lipschitz: Optional[float] = None

    def _apply(self, x):
        return np.asarray(self.func(x), dtype=float)


def spectral_norm(A, iters=200, seed=0):
    """Largest singular value of ``A`` by power iteration on ``A^T A``."""
    A = np.asarray(A, dtype=float)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        n = np.linalg.norm(w)
        if n == 0:
            return 0.0
        v = w / n
        sigma = np.sqrt(n)
    return float(sigma)


def evaluate(op, x):
    """Return ``T(x)``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if op.dim is not None and x.shape != (op.dim,):
        raise DimensionError(f"operator expects length {op.dim}, got {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("x must be finite")
    out = op._apply(x)
    if out.shape != x.shape:
        raise DimensionError(f"operator returned shape {out.shape} for input {x.shape}")
    return out


@dataclass(frozen=True)
class ViProblem:
    """Find ``x* in C`` with ``<T(x*), y - x*> >= 0`` for all ``y in C``."""

    set: ConvexSet
    op: ViOperator
    known_solution: Optional[np.ndarray] = None
    name: str = "problem"

    def __post_init__(self):
        if self.op.dim is not None and self.op.dim != self.set.dim:
            raise DimensionError("operator and set dimensions differ")
        if self.known_solution is not None:
            xs = _vec(self.known_solution, "known_solution")
            object.__setattr__(self, "known_solution", xs)
            if residual(self, xs) > 1e-8:
                raise ValueError("known_solution does not solve the problem")

    @property
    def dim(self):
        return self.set.dim


def residual(problem, x, beta=1.0):
    """Natural residual ``|x - P_C(x - beta T(x))|``; zero exactly at solutions."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    x = np.asarray(x, dtype=float).reshape(-1)
    if not problem.set.contains(x, ACTIVE_TOL):
        raise NotInSetError(f"{x} is not in the feasible set")
    return float(np.linalg.norm(x - problem.set.project(x - beta * evaluate(problem.op, x))))


# --------------------------------------------------------------------------
# reference problem
# --------------------------------------------------------------------------

EXAMPLE_CENTER = (0.5, 1.0)
EXAMPLE_LIPSCHITZ = 2.0


def reference_angle_example31():
    """Polar angle of the unique solution on the arc of the quarter disc."""
    return np.pi - np.arcsin(2 / np.sqrt(10)) + np.arcsin(1 / np.sqrt(10))


def reference_solution_example31():
    t = reference_angle_example31()
    return np.array([np.cos(t), np.sin(t)])


def example31_operator():
    # the sharp constant is sqrt(2); 2 is the published (valid) bound
    return Rotation(-np.pi / 2, EXAMPLE_CENTER, shift=True, lipschitz=EXAMPLE_LIPSCHITZ)


def example31_problem():
    return ViProblem(
        set=QuarterDisc(),
        op=example31_operator(),
        known_solution=reference_solution_example31(),
        name="example31",
    )
