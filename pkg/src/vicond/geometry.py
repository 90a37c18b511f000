"""Closed convex sets with exact projection, membership and normal-cone sampling.

Every set is immutable after construction. Projections onto boxes, balls,
halfspaces and the quarter disc are closed form. Intersections built from
halfspaces and at most one ball are projected exactly by active-set
enumeration; anything else goes through Dykstra's algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError, DivergenceError, NotInSetError

#: default membership tolerance
MEMBERSHIP_TOL = 1e-10
#: a constraint with |value| below this counts as active; also the slack
#: allowed for points handed to the normal-cone oracle
ACTIVE_TOL = 1e-8

DYKSTRA_TOL = 1e-10
DYKSTRA_MAX_ITER = 10_000
#: how far a constraint that is active by construction may drift in the
#: exact projector before the candidate is rejected
TIGHT_TOL = 1e-9


def _vec(x, name="x"):
    arr = np.array(x, dtype=float).reshape(-1)
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} must be finite, got {arr}")
    arr.setflags(write=False)
    return arr


def _check_dim(x, n):
    if x.shape != (n,):
        raise DimensionError(f"expected a vector of length {n}, got shape {x.shape}")


# --------------------------------------------------------------------------
# normal strategies
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalStrategy:
    """How to pick one element of a normal cone.

    ``mode`` is ``"zero"``, ``"unit"`` or ``"scaled"``; ``magnitude`` is the
    length used by ``"scaled"``; ``cap`` is the bound M on returned lengths.
    """

    mode: str = "zero"
    magnitude: float = 1.0
    cap: float = np.inf

    def __post_init__(self):
        if self.mode not in ("zero", "unit", "scaled"):
            raise ValueError(f"unknown normal strategy mode {self.mode!r}")
        if self.cap < 0:
            raise ValueError("cap M must be nonnegative")
        if self.mode == "scaled" and self.magnitude < 0:
            raise ValueError("scaled magnitude must be nonnegative")
        if self.length > self.cap:
            raise ValueError(
                f"normal length {self.length} exceeds the cap M={self.cap}")

    @classmethod
    def zero(cls):
        return cls("zero", 0.0)

    @classmethod
    def unit(cls, cap=np.inf):
        return cls("unit", 1.0, cap)

    @classmethod
    def scaled(cls, magnitude, cap=np.inf):
        return cls("scaled", float(magnitude), cap)

    @classmethod
    def parse(cls, text, cap=np.inf):
        """Parse ``zero``, ``unit`` or ``scaled:<m>``."""
        text = text.strip().lower()
        if text == "zero":
            return cls.zero()
        if text == "unit":
            return cls.unit(cap)
        if text.startswith("scaled:"):
            return cls.scaled(float(text.split(":", 1)[1]), cap)
        raise ValueError(f"cannot parse normal strategy {text!r}")

    @property
    def length(self):
        if self.mode == "zero":
            return 0.0
        if self.mode == "unit":
            return 1.0
        return self.magnitude

    def __str__(self):
        if self.mode == "scaled":
            return f"scaled:{self.magnitude:g}"
        return self.mode


# --------------------------------------------------------------------------
# sets
# --------------------------------------------------------------------------


class ConvexSet:
    """Interface shared by all feasible-set variants."""

    dim: int

    def project(self, p):
        raise NotImplementedError

    def contains(self, p, tol=MEMBERSHIP_TOL):
        raise NotImplementedError

    def active_normals(self, x, active_tol=ACTIVE_TOL):
        """Unit generators of the normal cone at ``x`` (empty list if interior)."""
        raise NotImplementedError

    def distance(self, p):
        p = _vec(p, "p")
        return float(np.linalg.norm(p - self.project(p)))


@dataclass(frozen=True)
class Halfspace(ConvexSet):
    """``{y : <a, y> <= b}``; ``a = 0, b = 0`` denotes the whole space."""

    a: np.ndarray
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", _vec(self.a, "a"))
        object.__setattr__(self, "b", float(self.b))
        if not np.isfinite(self.b):
            raise ValueError("offset b must be finite")
        if self.degenerate and self.b != 0.0:
            raise ValueError("a zero normal requires b = 0 (whole space)")

    @property
    def dim(self):
        return self.a.shape[0]

    @property
    def degenerate(self):
        return not self.a.any()

    @classmethod
    def whole_space(cls, n):
        return cls(np.zeros(n), 0.0)

    def value(self, p):
        return float(self.a @ p) - self.b

    def project(self, p):
        return halfspace_project(self, p)

    def contains(self, p, tol=MEMBERSHIP_TOL):
        p = _vec(p, "p")
        _check_dim(p, self.dim)
        return bool(self.a @ p <= self.b + tol)

    def active_normals(self, x, active_tol=ACTIVE_TOL):
        if self.degenerate:
            return []
        norm = np.linalg.norm(self.a)
        if abs(self.value(x)) / norm <= active_tol:
            return [self.a / norm]
        return []


@dataclass(frozen=True)
class Box(ConvexSet):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", _vec(self.lo, "lo"))
        object.__setattr__(self, "hi", _vec(self.hi, "hi"))
        if self.lo.shape != self.hi.shape:
            raise DimensionError("lo and hi must have equal length")
        if np.any(self.lo > self.hi):
            raise ValueError("empty box: need lo <= hi componentwise")

    @property
    def dim(self):
        return self.lo.shape[0]

    def project(self, p):
        p = _vec(p, "p")
        _check_dim(p, self.dim)
        return np.clip(p, self.lo, self.hi)

    def contains(self, p, tol=MEMBERSHIP_TOL):
        p = _vec(p, "p")
        _check_dim(p, self.dim)
        return bool(np.all(p >= self.lo - tol) and np.all(p <= self.hi + tol))

    def active_normals(self, x, active_tol=ACTIVE_TOL):
        out = []
        eye = np.eye(self.dim)
        for i in range(self.dim):
            if x[i] >= self.hi[i] - active_tol:
                out.append(eye[i])
            if x[i] <= self.lo[i] + active_tol:
                out.append(-eye[i])
        return out


@dataclass(frozen=True)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self):
        return self.center.shape[0]

    def project(self, p):
        p = _vec(p, "p")
        _check_dim(p, self.dim)
        d = p - self.center
        n = np.linalg.norm(d)
        if n <= self.radius:
            return p.copy()
        return self.center + (self.radius / n) * d

    def contains(self, p, tol=MEMBERSHIP_TOL):
        p = _vec(p, "p")
        _check_dim(p, self.dim)
        return bool(np.linalg.norm(p - self.center) <= self.radius + tol)

    def active_normals(self, x, active_tol=ACTIVE_TOL):
        d = x - self.center
        n = np.linalg.norm(d)
        if n >= self.radius - active_tol and n > 0:
            return [d / n]
        return []


@dataclass(frozen=True)
class Polyhedron(ConvexSet):
    """``{y : A y <= b}``, projected by Dykstra over the rows."""

    A: np.ndarray
    b: np.ndarray
    rows: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.ndim != 2:
            raise DimensionError("A must be a matrix")
        b = _vec(self.b, "b")
        if b.shape[0] != A.shape[0]:
            raise DimensionError("A and b disagree on the number of rows")
        A.setflags(write=False)
        rows = []
        for ai, bi in zip(A, b):
            if not np.any(ai):
                if bi < 0:
                    raise ValueError("zero row with negative rhs: empty set")
                continue
            rows.append(Halfspace(ai, bi))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "rows", tuple(rows))

    @property
    def dim(self):
        return self.A.shape[1]

    def project(self, p):
        p = _vec(p, "p")
        _check_dim(p, self.dim)
        if not self.rows:
            return p.copy()
        return intersection_project(self.rows, p)

    def contains(self, p, tol=MEMBERSHIP_TOL):
        p = _vec(p, "p")
        _check_dim(p, self.dim)
        return bool(np.all(self.A @ p <= self.b + tol))

    def active_normals(self, x, active_tol=ACTIVE_TOL):
        out = []
        for h in self.rows:
            out.extend(h.active_normals(x, active_tol))
        return out


@dataclass(frozen=True)
class Intersection(ConvexSet):
    """Finite intersection; nonemptiness is the caller's obligation."""

    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("an intersection needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise DimensionError(f"members disagree on dimension: {dims}")
        object.__setattr__(self, "members", members)

    @property
    def dim(self):
        return self.members[0].dim

    def project(self, p):
        return intersection_project(self.members, p)

    def contains(self, p, tol=MEMBERSHIP_TOL):
        return all(m.contains(p, tol) for m in self.members)

    def active_normals(self, x, active_tol=ACTIVE_TOL):
        out = []
        for m in self.members:
            out.extend(m.active_normals(x, active_tol))
        return out


@dataclass(frozen=True)
class QuarterDisc(ConvexSet):
    """``{x in R^2 : |x| <= 1, x1 <= 0, x2 >= 0}``."""

    @property
    def dim(self):
        return 2

    def project(self, p):
        # for a cone K and a ball centred at its apex, P_{B∩K} = P_B ∘ P_K
        p = _vec(p, "p")
        _check_dim(p, 2)
        q = np.array([min(p[0], 0.0), max(p[1], 0.0)])
        n = np.hypot(q[0], q[1])
        if n > 1.0:
            q /= n
        return q

    def contains(self, p, tol=MEMBERSHIP_TOL):
        p = _vec(p, "p")
        _check_dim(p, 2)
        return bool(p[0] <= tol and p[1] >= -tol and np.hypot(p[0], p[1]) <= 1.0 + tol)

    def active_normals(self, x, active_tol=ACTIVE_TOL):
        out = []
        if x[0] >= -active_tol:
            out.append(np.array([1.0, 0.0]))
        if x[1] <= active_tol:
            out.append(np.array([0.0, -1.0]))
        n = np.hypot(x[0], x[1])
        if n >= 1.0 - active_tol:
            out.append(np.asarray(x, dtype=float) / n)
        return out

    def as_intersection(self):
        return Intersection((
            Ball(np.zeros(2), 1.0),
            Halfspace([1.0, 0.0], 0.0),
            Halfspace([0.0, -1.0], 0.0),
        ))


# --------------------------------------------------------------------------
# module-level operations
# --------------------------------------------------------------------------


def project(cset, p):
    """Orthogonal projection of ``p`` onto ``cset``."""
    return cset.project(p)


def contains(cset, p, tol=MEMBERSHIP_TOL):
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return cset.contains(p, tol)


def normal_cone_sample(cset, x, strategy, tol=ACTIVE_TOL):
    """Pick one vector of the normal cone of ``cset`` at ``x``.

    The direction is the normalised sum of the unit generators of the active
    constraints, which lies inside the cone; its length is set by
    ``strategy``. Interior points and the ``zero`` strategy give the zero
    vector.

    Raises
    ------
    NotInSetError
        If ``x`` is not in ``cset`` within ``tol``.
    """
    x = _vec(x)
    _check_dim(x, cset.dim)
    if not cset.contains(x, tol):
        raise NotInSetError(f"{x} is not in the feasible set")
    zero = np.zeros(cset.dim)
    if strategy.mode == "zero" or strategy.length == 0:
        return zero
    gens = cset.active_normals(x)
    if not gens:
        return zero
    s = np.sum(gens, axis=0)
    n = np.linalg.norm(s)
    if n <= 1e-12:
        return zero
    return (strategy.length / n) * s


def halfspace_project(h, p):
    p = _vec(p, "p")
    _check_dim(p, h.dim)
    if h.degenerate:
        return p.copy()
    excess = float(h.a @ p) - h.b
    if excess <= 0:
        return p.copy()
    return p - (excess / float(h.a @ h.a)) * h.a


def _decompose(sets):
    """Split sets into (balls, halfspaces), or None if some member is not
    expressible with balls and halfspaces."""
    balls, halves = [], []
    for s in sets:
        if isinstance(s, Halfspace):
            if not s.degenerate:
                halves.append(s)
        elif isinstance(s, Ball):
            balls.append(s)
        elif isinstance(s, Box):
            eye = np.eye(s.dim)
            halves += [Halfspace(eye[i], s.hi[i]) for i in range(s.dim)]
            halves += [Halfspace(-eye[i], -s.lo[i]) for i in range(s.dim)]
        elif isinstance(s, Polyhedron):
            halves += list(s.rows)
        elif isinstance(s, QuarterDisc):
            inner = _decompose(s.as_intersection().members)
            balls += inner[0]
            halves += inner[1]
        elif isinstance(s, Intersection):
            inner = _decompose(s.members)
            if inner is None:
                return None
            balls += inner[0]
            halves += inner[1]
        else:
            return None
    return balls, halves


def _affine_projector(AS, bS):
    """Projector onto ``{y : AS y = bS}``, or ``None`` if that set is empty."""
    G = AS @ AS.T

    def proj(y):
        lam = np.linalg.lstsq(G, AS @ y - bS, rcond=None)[0]
        return y - AS.T @ lam

    probe = proj(np.zeros(AS.shape[1]))
    if np.linalg.norm(AS @ probe - bS) > 1e-9 * (1 + np.abs(bS).max()):
        return None
    return proj


def active_set_project(sets, p, tol=1e-14, max_candidates=20_000):
    """Exact projection onto an intersection of halfspaces and at most one ball.

    Enumerates candidate active sets: for each subset of at most ``n``
    halfspaces (optionally together with the sphere) the nearest point of the
    face they span is computed in closed form, and the nearest candidate that
    satisfies every other constraint up to rounding (``tol``) is the
    projection. Returns
    ``None`` when the members do not fit this pattern or the enumeration
    would exceed ``max_candidates``.
    """
    from itertools import combinations
    from math import comb

    parts = _decompose(sets)
    if parts is None:
        return None
    balls, halves = parts
    if len(balls) > 1:
        return None
    p = _vec(p, "p")
    n = p.shape[0]
    m = len(halves)
    kmax = min(n, m)
    count = sum(comb(m, k) for k in range(kmax + 1)) * (1 + len(balls))
    if count > max_candidates:
        return None
    ball = balls[0] if balls else None
    A = np.array([h.a for h in halves]).reshape(m, n)
    b = np.array([h.b for h in halves])
    norms = np.linalg.norm(A, axis=1) if m else np.zeros(0)

    def feasible(q, tight, on_sphere):
        # constraints in ``tight`` hold by construction and are only checked
        # loosely against a badly conditioned solve; the rest must hold up to
        # rounding, since separations near a solution are tiny
        scale = max(1.0, float(np.linalg.norm(q)))
        slack = tol * scale
        if m:
            viol = (A @ q - b) / norms
            if tight and np.any(np.abs(viol[list(tight)]) > TIGHT_TOL * scale):
                return False
            viol[list(tight)] = -np.inf
            if np.any(viol > slack):
                return False
        if ball is None:
            return True
        gap = np.linalg.norm(q - ball.center) - ball.radius
        if on_sphere:
            return abs(gap) <= TIGHT_TOL * scale
        return gap <= slack

    best, best_d = None, np.inf
    for k in range(kmax + 1):
        for S in combinations(range(m), k):
            if k:
                proj_aff = _affine_projector(A[list(S)], b[list(S)])
                if proj_aff is None:
                    continue
            else:
                proj_aff = lambda y: y
            base = proj_aff(p)
            cands = [(base, False)]
            # a face of dimension zero meets the sphere only at ``base``,
            # which the ball test on ``base`` already covers
            if ball is not None and np.linalg.matrix_rank(A[list(S)]) < n if k else ball is not None:
                c_aff = proj_aff(ball.center)
                r2 = ball.radius ** 2 - float(np.sum((ball.center - c_aff) ** 2))
                if r2 >= 0:
                    d = base - c_aff
                    dn = np.linalg.norm(d)
                    if dn > 0:
                        cands.append((c_aff + (np.sqrt(r2) / dn) * d, True))
                    elif r2 == 0:
                        cands.append((c_aff, True))
            for q, on_sphere in cands:
                dq = np.linalg.norm(q - p)
                if dq < best_d and feasible(q, S, on_sphere):
                    best, best_d = q, dq
    if best is None:
        raise DivergenceError("intersection appears to be empty")
    return best


def intersection_project(sets, p, tol=DYKSTRA_TOL, max_iter=DYKSTRA_MAX_ITER):
    """Projection onto an intersection: exact active-set enumeration when the
    members are halfspaces plus at most one ball, Dykstra otherwise."""
    q = active_set_project(sets, p)
    if q is not None:
        return q
    return dykstra_project(sets, p, tol, max_iter)


def dykstra_project(sets: Sequence[ConvexSet], p, tol=DYKSTRA_TOL, max_iter=DYKSTRA_MAX_ITER):
    """Project ``p`` onto the intersection of ``sets`` with Dykstra's algorithm.

    Stops once a full sweep changes neither the iterate nor the correction
    terms by more than ``tol`` and the iterate is within ``ACTIVE_TOL`` of
    every member.

    Raises
    ------
    DivergenceError
        After ``max_iter`` sweeps without meeting the stopping rule.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    sets = [s for s in sets if not (isinstance(s, Halfspace) and s.degenerate)]
    p = _vec(p, "p")
    if not sets:
        return p.copy()
    for s in sets:
        _check_dim(p, s.dim)
    if len(sets) == 1:
        return sets[0].project(p)

    # exact shortcuts: p already feasible, or a single member's projection is
    # feasible for all others (then it is the nearest point of a superset)
    images = [s.project(p) for s in sets]
    if all(np.array_equal(q, p) for q in images):
        return p.copy()
    for i, q in enumerate(images):
        if all(j == i or s.distance(q) <= tol for j, s in enumerate(sets)):
            return q

    x = p.copy()
    incs = [np.zeros_like(p) for _ in sets]
    for _ in range(max_iter):
        change = 0.0
        for i, s in enumerate(sets):
            y = x + incs[i]
            x_new = s.project(y)
            inc = y - x_new
            change += float(np.sum((inc - incs[i]) ** 2)) + float(np.sum((x_new - x) ** 2))
            incs[i] = inc
            x = x_new
        if change <= tol * tol and all(s.distance(x) <= ACTIVE_TOL for s in sets):
            return x
    raise DivergenceError(
        f"Dykstra did not converge in {max_iter} sweeps (empty or ill-conditioned intersection?)")
