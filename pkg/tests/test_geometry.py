import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from vicond import (Ball, Box, DivergenceError, Halfspace, Intersection, NormalStrategy,
                    NotInSetError, Polyhedron, QuarterDisc, contains, dykstra_project,
                    halfspace_project, intersection_project, normal_cone_sample, project)
from vicond.geometry import active_set_project

import oracles

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)
points2 = arrays(np.float64, 2, elements=finite)

SETS = {
    "quarter-disc": QuarterDisc(),
    "box": Box([-1, 0], [0.5, 2]),
    "ball": Ball([0.5, -0.5], 1.5),
    "halfspace": Halfspace([1, 2], 0.5),
    "polyhedron": Polyhedron([[1, 1], [-1, 0], [0, -1]], [1, 0, 0]),
    "intersection": Intersection([Ball([0, 0], 1), Halfspace([1, -1], 0.2)]),
}


# ---- examples -------------------------------------------------------------

def test_quarter_disc_projection_examples():
    C = QuarterDisc()
    np.testing.assert_array_equal(C.project([-0.5, 0.5]), [-0.5, 0.5])
    np.testing.assert_allclose(C.project([-0.125, 1.125]), [-0.11043152607484648, 0.9938837346736189],
                               atol=1e-15)
    np.testing.assert_allclose(C.project([0.5, 0.5]), [0.0, 0.5], atol=1e-15)


def test_quarter_disc_projection_matches_grid_oracle():
    pts = oracles.grid_quarter_disc(400)
    pitch = 1 / 399
    for p in ([-0.125, 1.125], [0.5, 0.5], [1.0, -2.0], [-3.0, 0.2]):
        q = QuarterDisc().project(p)
        g = oracles.grid_project(pts, np.array(p))
        # the distance is flat along the boundary, so compare distances
        dq, dg = np.linalg.norm(q - p), np.linalg.norm(g - p)
        assert dq <= dg + 1e-12 and dg - dq <= 2 * pitch


def test_quarter_disc_is_the_stated_intersection():
    rng = np.random.default_rng(3)
    C, D = QuarterDisc(), QuarterDisc().as_intersection()
    for p in rng.normal(size=(200, 2)) * 2:
        np.testing.assert_allclose(C.project(p), D.project(p), atol=1e-9)
        assert C.contains(p, 1e-12) == D.contains(p, 1e-12)


def test_contains_examples():
    assert contains(QuarterDisc(), [0, 1], 1e-12)
    assert not contains(QuarterDisc(), [0.1, 0.5], 1e-12)
    assert contains(Ball([0, 0], 1), [1 + 1e-10, 0], 1e-9)
    with pytest.raises(ValueError):
        contains(QuarterDisc(), [0, 0], -1)


def test_normal_cone_examples():
    C = QuarterDisc()
    unit = NormalStrategy.unit()
    np.testing.assert_array_equal(normal_cone_sample(C, [-0.5, 0.5], unit), [0, 0])
    xs = oracles.x_star()
    np.testing.assert_allclose(normal_cone_sample(C, xs, unit), xs, atol=1e-15)
    v = normal_cone_sample(C, [0, 1], unit)
    np.testing.assert_allclose(v, np.array([1, 1]) / np.sqrt(2), atol=1e-15)
    grid = oracles.grid_quarter_disc(100)
    assert np.all((grid - [0, 1]) @ v <= 1e-12)
    np.testing.assert_array_equal(normal_cone_sample(C, [0, 1], NormalStrategy.zero()), [0, 0])
    np.testing.assert_allclose(np.linalg.norm(normal_cone_sample(C, [0, 1], NormalStrategy.scaled(0.3))), 0.3)
    with pytest.raises(NotInSetError):
        normal_cone_sample(C, [1, 1], unit)


def test_normal_strategy_parse_and_cap():
    assert NormalStrategy.parse("zero").length == 0
    assert NormalStrategy.parse("unit").length == 1
    assert NormalStrategy.parse("scaled:0.5").length == 0.5
    assert str(NormalStrategy.parse("scaled:0.5")) == "scaled:0.5"
    with pytest.raises(ValueError):
        NormalStrategy.parse("unit", cap=0.5)
    with pytest.raises(ValueError):
        NormalStrategy.parse("sideways")


def test_halfspace_projection_examples():
    np.testing.assert_array_equal(halfspace_project(Halfspace([1, 0], 0), [2, 3]), [0, 3])
    np.testing.assert_array_equal(halfspace_project(Halfspace([0, 0], 0), [5, -7]), [5, -7])
    np.testing.assert_allclose(halfspace_project(Halfspace([1, 1], 0), [1, 1]), [0, 0], atol=1e-15)
    with pytest.raises(ValueError):
        Halfspace([0, 0], 1)


def test_dykstra_examples():
    np.testing.assert_allclose(
        dykstra_project([Halfspace([1, 0], 0), Halfspace([0, 1], 0)], [1, 1]), [0, 0], atol=1e-10)
    np.testing.assert_allclose(
        dykstra_project([Ball([0, 0], 1), Halfspace([1, 0], 0)], [0, 2]), [0, 1], atol=1e-10)
    np.testing.assert_array_equal(dykstra_project([QuarterDisc()], [-0.5, 0.5]), [-0.5, 0.5])


def test_dykstra_reports_empty_intersection():
    with pytest.raises(DivergenceError):
        dykstra_project([Halfspace([1, 0], -1), Halfspace([-1, 0], -1)], [0, 0], max_iter=200)
    with pytest.raises(DivergenceError):
        intersection_project([Ball([0, 0], 1), Halfspace([1, 0], -2)], [0, 0])


def test_constructor_validation():
    with pytest.raises(ValueError):
        Box([1, 0], [0, 1])
    with pytest.raises(ValueError):
        Ball([0, 0], 0)


def test_active_set_rejects_spurious_sphere_points():
    # two halfspaces pin a vertex; the sphere must not add candidates there
    sets = [Ball([0, 0], 1), Halfspace([1, 0], -0.5), Halfspace([0, -1], -0.5),
            Halfspace([1, 1], 0.1)]
    p = np.array([0.3, 0.9])
    q = active_set_project(sets, p)
    for s in sets:
        assert s.distance(q) <= 1e-12
    d = dykstra_project(sets, p, tol=1e-13, max_iter=200_000)
    np.testing.assert_allclose(q, d, atol=1e-8)


def test_exact_projection_matches_dykstra_on_random_polyhedra():
    rng = np.random.default_rng(11)
    for _ in range(50):
        A = rng.normal(size=(4, 2))
        b = np.abs(rng.normal(size=4)) + 0.1       # origin strictly inside
        sets = [Halfspace(a, t) for a, t in zip(A, b)] + [Ball([0, 0], 1.2)]
        p = rng.normal(size=2) * 3
        np.testing.assert_allclose(active_set_project(sets, p),
                                   dykstra_project(sets, p, tol=1e-12, max_iter=100_000), atol=1e-7)


# ---- property suites ------------------------------------------------------

@pytest.mark.parametrize("name", list(SETS))
@settings(max_examples=60, deadline=None)
@given(p=points2, q=points2)
def test_projection_firmly_nonexpansive(name, p, q):
    C = SETS[name]
    Pp, Pq = C.project(p), C.project(q)
    assert np.sum((Pp - Pq) ** 2) <= (Pp - Pq) @ (p - q) + 1e-9


@pytest.mark.parametrize("name", list(SETS))
@settings(max_examples=60, deadline=None)
@given(p=points2)
def test_projection_obtuse_angle_and_idempotence(name, p):
    C = SETS[name]
    q = C.project(p)
    assert C.contains(q, 1e-9)
    np.testing.assert_allclose(C.project(q), q, atol=1e-9)
    rng = np.random.default_rng(0)
    for y in rng.normal(size=(30, 2)) * 3:
        y = C.project(y)
        assert (p - q) @ (y - q) <= 1e-8


@settings(max_examples=100, deadline=None)
@given(p=points2)
def test_quarter_disc_projection_matches_piecewise_oracle(p):
    np.testing.assert_allclose(QuarterDisc().project(p), oracles.project_quarter_disc(p), atol=1e-14)


@pytest.mark.parametrize("name", list(SETS))
@settings(max_examples=60, deadline=None)
@given(p=points2)
def test_normal_cone_validity(name, p):
    C = SETS[name]
    x = C.project(p)
    v = normal_cone_sample(C, x, NormalStrategy.unit())
    assert np.linalg.norm(v) in (0.0, pytest.approx(1.0))
    rng = np.random.default_rng(1)
    for y in rng.normal(size=(30, 2)) * 3:
        assert v @ (C.project(y) - x) <= 1e-8


@settings(max_examples=60, deadline=None)
@given(p=points2)
def test_normal_cone_zero_in_interior(p):
    C = Ball([0, 0], 2)
    x = 0.5 * C.project(p)
    np.testing.assert_array_equal(normal_cone_sample(C, x, NormalStrategy.unit()), [0, 0])


def test_project_dimension_mismatch():
    from vicond import DimensionError
    with pytest.raises(DimensionError):
        project(QuarterDisc(), [0, 0, 0])
