import math

import numpy as np
import pytest

from complementarity.geometry import (
    UNIT_SQUARE,
    DimensionError,
    LinearProgram,
    Polytope,
    contains_point,
    contains_point_lp,
    convex_hull_2d,
    enumerate_vertices_lp,
    lp_residual,
    max_inscribed_scaled_copy,
    polygon_area,
    regular_polygon,
    solve_lp,
)

DIAMOND = Polytope.from_points([(0.5, 0), (1, 0.5), (0.5, 1), (0, 0.5)])
SEGMENT = Polytope.from_points([(0, 0), (1, 1)])


def test_single_variable_box():
    res = solve_lp(LinearProgram.from_arrays([1.0], [[1.0]], [1.0]))
    assert res.optimal and res.value == pytest.approx(1.0) and res.x[0] == pytest.approx(1.0)


def test_simplex_face():
    res = solve_lp(LinearProgram.from_arrays([1.0, 1.0], [[1.0, 1.0]], [1.0]))
    assert res.value == pytest.approx(1.0)


def test_infeasible_and_unbounded():
    lp = LinearProgram([1.0])
    lp.add([1.0], "<=", 1.0)
    lp.add([1.0], ">=", 2.0)
    assert solve_lp(lp).status == "infeasible"
    lp = LinearProgram([1.0, 0.0])
    lp.add([1.0, -1.0], "<=", 1.0)
    assert solve_lp(lp).status == "unbounded"


def test_free_and_shifted_bounds():
    # maximize -|x - 3| style: max -t with t >= x - 3, t >= 3 - x, x free
    lp = LinearProgram([0.0, -1.0], bounds=[(None, None), (0.0, None)])
    lp.add([1.0, -1.0], "<=", 3.0)
    lp.add([-1.0, -1.0], "<=", -3.0)
    res = solve_lp(lp)
    assert res.value == pytest.approx(0.0, abs=1e-9) and res.x[0] == pytest.approx(3.0)
    lp = LinearProgram([-1.0], bounds=[(-2.0, 5.0)])
    assert solve_lp(lp).x[0] == pytest.approx(-2.0)


def test_bland_and_dantzig_agree(rng):
    for _ in range(30):
        A = rng.normal(size=(4, 5))
        lp = LinearProgram.from_arrays(rng.normal(size=5), A, rng.uniform(0.1, 2, 4), bounds=[(0, 2)] * 5)
        a = solve_lp(lp, rule="bland")
        b = solve_lp(lp, rule="dantzig")
        assert a.value == pytest.approx(b.value, abs=1e-9)


def _random_bounded_lp(rng):
    n = int(rng.integers(2, 6))
    m = int(rng.integers(1, 5))
    A = rng.normal(size=(m, n))
    b = rng.uniform(-0.3, 2.0, size=m)
    c = rng.normal(size=n)
    upper = rng.uniform(0.5, 3.0, size=n)
    A_eq = rng.normal(size=(1, n)) if rng.random() < 0.3 else None
    b_eq = [float(rng.uniform(-0.2, 0.2))] if A_eq is not None else None
    return LinearProgram.from_arrays(c, A, b, A_eq, b_eq, [(0.0, u) for u in upper])


def test_lp_matches_vertex_enumeration(rng):
    checked = 0
    for _ in range(150):
        lp = _random_bounded_lp(rng)
        res = solve_lp(lp)
        oracle = enumerate_vertices_lp(lp)
        if oracle is None:
            assert res.status == "infeasible"
            continue
        assert res.optimal
        assert res.value == pytest.approx(oracle, abs=1e-7)
        assert lp_residual(lp, res.x) <= 1e-9
        checked += 1
    assert checked > 50


def test_unbounded_certificate():
    # x = 0 is feasible and d = (1, 1, 1) is an improving ray of the constraints
    A = np.array([[-1.0, 0.5, 0.2], [0.3, -1.0, 0.1]])
    c = np.array([1.0, 1.0, 0.5])
    d = np.ones(3)
    assert np.all(A @ d <= 0) and c @ d > 0
    assert solve_lp(LinearProgram.from_arrays(c, A, [1.0, 1.0])).status == "unbounded"


def test_hull_orientation_and_collinear_points():
    V = convex_hull_2d([(0, 0), (1, 0), (0.5, 0), (1, 1), (0, 1), (0.5, 0.5)])
    assert len(V) == 4
    area2 = sum(V[i, 0] * V[(i + 1) % 4, 1] - V[(i + 1) % 4, 0] * V[i, 1] for i in range(4))
    assert area2 > 0


@pytest.mark.parametrize("point, inside", [((1, 1), True), ((1.01, 0.5), False), ((0.5, 0.5), True)])
def test_contains_unit_square(point, inside):
    assert contains_point(UNIT_SQUARE, point) is inside
    assert contains_point_lp(UNIT_SQUARE, point) is inside


def test_diamond_excludes_corner():
    assert not contains_point(DIAMOND, (1, 1))
    assert contains_point(DIAMOND, (0.5, 0.5))


def test_contains_vertices_not_pushed_out(rng):
    for _ in range(20):
        body = Polytope.from_points(rng.random((8, 2)))
        for v, n in zip(body.vertices, body.normals):
            assert contains_point(body, v)
        for n, b in zip(body.normals, body.offsets):
            # a point just beyond the facet midpoint
            on = [v for v in body.vertices if abs(n @ v - b) < 1e-9]
            mid = np.mean(on, axis=0)
            assert not contains_point(body, mid + 1e-3 * n)


def test_contains_point_dimension_mismatch():
    with pytest.raises(DimensionError):
        contains_point(UNIT_SQUARE, (0.5, 0.5, 0.5))


def test_inscribed_copies():
    r, x = max_inscribed_scaled_copy(UNIT_SQUARE, UNIT_SQUARE)
    assert r == pytest.approx(1.0) and np.allclose(x, 0.0)
    r, x = max_inscribed_scaled_copy(DIAMOND, UNIT_SQUARE)
    assert r == pytest.approx(0.5)
    assert np.allclose(x, (0.25, 0.25))
    assert max_inscribed_scaled_copy(SEGMENT, UNIT_SQUARE)[0] == 0.0


def test_inscribed_diamond_grid_oracle():
    best = 0.0
    for r in np.arange(0, 1.0001, 0.01):
        for sx in np.arange(0, 1.0001, 0.01):
            corners = [(sx + a * r, sx + b * r) for a in (0, 1) for b in (0, 1)]
            if all(abs(px - 0.5) + abs(py - 0.5) <= 0.5 + 1e-12 for px, py in corners):
                best = max(best, r)
    assert max_inscribed_scaled_copy(DIAMOND, UNIT_SQUARE)[0] == pytest.approx(best, abs=1e-2)


def test_inscribed_scale_monotone_under_inclusion(rng):
    for _ in range(40):
        outer = Polytope.from_points(rng.random((10, 2)))
        w = rng.dirichlet(np.ones(len(outer.vertices)), size=6)
        inner = Polytope.from_points(w @ outer.vertices)
        assert all(contains_point(outer, v) for v in inner.vertices)
        assert max_inscribed_scaled_copy(inner, UNIT_SQUARE)[0] <= max_inscribed_scaled_copy(outer, UNIT_SQUARE)[0] + 1e-9


def test_areas():
    assert polygon_area(UNIT_SQUARE) == pytest.approx(1.0)
    assert polygon_area(Polytope.box((-1, -1), (1, 1))) == pytest.approx(4.0)
    assert polygon_area(SEGMENT) == 0.0
    assert polygon_area(regular_polygon(64)) == pytest.approx(math.pi, rel=5e-3)


def test_area_invariant_under_rotation_and_order(rng):
    pts = rng.random((9, 2))
    a = polygon_area(Polytope.from_points(pts))
    th = 0.7
    R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    assert polygon_area(Polytope.from_points(pts[::-1])) == pytest.approx(a)
    assert polygon_area(Polytope.from_points(pts @ R.T)) == pytest.approx(a)


def test_inscribed_rejects_higher_dimension():
    cube = Polytope.box((0, 0, 0), (1, 1, 1))
    with pytest.raises(DimensionError):
        max_inscribed_scaled_copy(cube, cube)
