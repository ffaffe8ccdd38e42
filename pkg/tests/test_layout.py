import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circlepatterns import layout as lo
from circlepatterns import surface as surf
from circlepatterns.energy import PatternProblem, kite_half_angle
from circlepatterns.layout import HermitianCircle, MoebiusMap, ProjectivePoint
from circlepatterns.solver import solve

from oracles import ball_gradient_descent, mobius_ball

CUBE_RADIUS = math.acos(1 / math.sqrt(3))


def random_moebius(rng):
    while True:
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        if abs(np.linalg.det(m)) > 0.1:
            return MoebiusMap(m)


def random_sphere_points(rng, n):
    pts = rng.normal(size=(n, 3))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def pairwise(points):
    points = np.asarray(points)
    return np.linalg.norm(points[:, None] - points[None, :], axis=2)


@pytest.fixture(scope="module")
def cube_solution():
    p = PatternProblem(surf.cube(), "spherical", 2 * math.pi / 3, 2 * math.pi)
    rho = solve(p).rho
    return p, rho, lo.layout_pattern(p, rho)


@pytest.fixture(scope="module")
def torus_solutions():
    out = {}
    for geometry, theta in (("euclidean", math.pi / 2), ("hyperbolic", math.pi / 3)):
        p = PatternProblem(surf.quad_torus(), geometry, theta, 2 * math.pi)
        rho = solve(p).rho
        out[geometry] = (p, rho, lo.layout_pattern(p, rho))
    return out


class TestProjectivePoint:
    def test_basics(self):
        assert ProjectivePoint.infinity().is_infinite()
        assert ProjectivePoint.from_complex(2 + 1j).to_complex() == 2 + 1j
        assert cmath.isinf(ProjectivePoint.infinity().to_complex())
        with pytest.raises(ValueError):
            ProjectivePoint(0, 0)

    def test_chordal_distance(self):
        assert ProjectivePoint.from_complex(0).distance_to(ProjectivePoint.infinity()) == pytest.approx(2)
        assert ProjectivePoint.from_complex(1).distance_to(ProjectivePoint.from_complex(-1)) == pytest.approx(2)


class TestMoebius:
    def test_three_points(self):
        rng = np.random.default_rng(0)
        src = [complex(*rng.normal(size=2)) for _ in range(3)]
        dst = [complex(*rng.normal(size=2)) for _ in range(3)]
        m = lo.moebius_from_three_points(src, dst)
        for a, b in zip(src, dst):
            assert abs(m(a) - b) <= 1e-12
        with pytest.raises(ValueError):
            lo.moebius_from_three_points([0, 0, 1], dst)

    def test_inverse_and_singular(self):
        m = random_moebius(np.random.default_rng(1))
        assert (m @ m.inverse()).distance(MoebiusMap.identity()) <= 1e-14
        with pytest.raises(ValueError):
            MoebiusMap([[1, 2], [2, 4]])

    @pytest.mark.parametrize("geometry, check", [
        ("spherical", "is_spherical_isometry"), ("hyperbolic", "is_hyperbolic_isometry")])
    def test_isometry_subgroup_closed(self, geometry, check):
        rng = np.random.default_rng(2)
        prod = MoebiusMap.identity()
        for _ in range(30):
            t = rng.uniform(0.05, 0.5)
            prod = prod @ lo.rotation(rng.uniform(-7, 7)) @ lo.translation(geometry, t)
            assert getattr(prod, check)(tol=1e-12)
        assert not getattr(lo.translation("euclidean", 0.5), check)()

    def test_translation_moves_origin(self):
        for geometry in ("euclidean", "hyperbolic", "spherical"):
            assert lo.translation(geometry, 0.4)(0) == pytest.approx(0.4)
        with pytest.raises(ValueError):
            lo.translation("hyperbolic", 1.2)


class TestCircles:
    def test_unit_circle(self):
        c = lo.circle_from_center_radius("euclidean", 0, 1.0)
        for phi in np.linspace(0, 6, 7):
            assert c.contains(ProjectivePoint.from_complex(cmath.exp(1j * phi)), tol=1e-14)

    def test_spherical_equator(self):
        c = lo.circle_from_center_radius("spherical", ProjectivePoint.infinity(), math.pi / 2)
        for phi in np.linspace(0, 6, 7):
            assert c.contains(ProjectivePoint.from_complex(cmath.exp(1j * phi)), tol=1e-14)
        assert c.radius("spherical") == pytest.approx(math.pi / 2)

    def test_hyperbolic_origin(self):
        r = 1.3
        c = lo.circle_from_center_radius("hyperbolic", 0, r)
        centre, radius = c.euclidean_center_radius()
        assert abs(centre) <= 1e-15 and radius == pytest.approx(math.tanh(r / 2))

    @pytest.mark.parametrize("geometry, radius", [
        ("euclidean", 0.7), ("hyperbolic", 0.9), ("spherical", 2.2)])
    def test_radius_recovered_off_centre(self, geometry, radius):
        centre = ProjectivePoint.from_complex(0.3 - 0.2j)
        c = lo.circle_from_center_radius(geometry, centre, radius)
        assert c.radius(geometry) == pytest.approx(radius, abs=1e-12)

    def test_paired_points(self):
        z = 0.3 + 0.4j
        assert lo.paired_point("euclidean", z).is_infinite()
        assert lo.paired_point("hyperbolic", z).to_complex() == pytest.approx(1 / z.conjugate())
        assert lo.paired_point("spherical", z).to_complex() == pytest.approx(-1 / z.conjugate())

    @pytest.mark.parametrize("geometry, radius", [
        ("euclidean", -1.0), ("hyperbolic", 0.0), ("spherical", 3.5)])
    def test_radius_range(self, geometry, radius):
        with pytest.raises(ValueError):
            lo.circle_from_center_radius(geometry, 0, radius)

    def test_not_a_circle(self):
        with pytest.raises(ValueError):
            HermitianCircle(np.eye(2))

    def test_list_round_trip(self):
        c = lo.circle_from_center_radius("euclidean", 1 + 2j, 0.5)
        assert np.allclose(HermitianCircle.from_list(c.to_list()).matrix, c.matrix)


class TestIntersectionAngle:
    def test_orthogonal(self):
        a = lo.circle_from_center_radius("euclidean", 0, 1.0)
        b = lo.circle_from_center_radius("euclidean", math.sqrt(2), 1.0)
        assert lo.intersection_angle(a, b) == pytest.approx(math.pi / 2)

    def test_tangent(self):
        a = lo.circle_from_center_radius("euclidean", 0, 1.0)
        b = lo.circle_from_center_radius("euclidean", 2, 1.0)
        angle = lo.intersection_angle(a, b)
        assert min(angle, math.pi - angle) <= 1e-7

    def test_disjoint(self):
        a = lo.circle_from_center_radius("euclidean", 0, 1.0)
        b = lo.circle_from_center_radius("euclidean", 5, 1.0)
        with pytest.raises(ValueError):
            lo.intersection_angle(a, b)

    def test_moebius_invariance(self):
        rng = np.random.default_rng(3)
        a = lo.circle_from_center_radius("euclidean", 0.1, 1.0)
        b = lo.circle_from_center_radius("euclidean", 1.2 + 0.3j, 0.8)
        base = lo.intersection_angle(a, b)
        for _ in range(100):
            m = random_moebius(rng)
            ma, mb = m.act_on_circle(a), m.act_on_circle(b)
            assert lo.intersection_angle(ma, mb) == pytest.approx(base, abs=1e-10)
            assert ma.determinant < 0 and mb.determinant < 0

    def test_image_of_points(self):
        rng = np.random.default_rng(4)
        c = lo.circle_from_center_radius("euclidean", 0.5j, 1.5)
        m = random_moebius(rng)
        image = m.act_on_circle(c)
        for phi in np.linspace(0, 6, 5):
            p = ProjectivePoint.from_complex(0.5j + 1.5 * cmath.exp(1j * phi))
            assert image.contains(m(p), tol=1e-10)


class TestStereographic:
    def test_poles(self):
        assert lo.stereographic("sphere_to_plane", [0, 0, 1]).is_infinite()
        assert lo.stereographic("sphere_to_plane", [1, 0, 0]).to_complex() == pytest.approx(1)
        assert lo.stereographic("sphere_to_plane", [0, 0, -1]).to_complex() == pytest.approx(0)

    def test_formula(self):
        x = np.array([0.36, 0.48, 0.8])
        z = (x[0] + 1j * x[1]) / (1 - x[2])
        assert lo.stereographic("sphere_to_plane", x).to_complex() == pytest.approx(z)

    def test_round_trip(self):
        pts = random_sphere_points(np.random.default_rng(5), 500)
        back = np.array([lo.stereographic("plane_to_sphere", lo.stereographic("sphere_to_plane", p))
                         for p in pts])
        assert np.max(np.abs(back - pts)) <= 1e-14

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            lo.stereographic("sideways", [0, 0, 1])


class TestNormalize:
    def test_tetrahedron(self):
        pts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / math.sqrt(3)
        m = lo.normalize_moebius(pts)
        assert m.is_spherical_isometry(tol=1e-10)
        assert np.linalg.norm(lo.apply_to_sphere_points(m, pts).sum(axis=0)) <= 1e-12

    def test_equator_triple(self):
        pts = np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0]], dtype=float)
        m = lo.normalize_moebius(pts)
        image = lo.apply_to_sphere_points(m, pts)
        assert np.linalg.norm(image.sum(axis=0)) <= 1e-9
        oracle = mobius_ball(ball_gradient_descent(pts), pts)
        assert np.linalg.norm(oracle.sum(axis=0)) <= 1e-6
        assert np.allclose(pairwise(image), pairwise(oracle), atol=1e-6)

    def test_random_sets(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            n = int(rng.integers(3, 21))
            pts = random_sphere_points(rng, n)
            image = lo.apply_to_sphere_points(lo.normalize_moebius(pts), pts)
            assert np.linalg.norm(image.sum(axis=0)) <= 1e-9

    def test_equivariance(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            pts = random_sphere_points(rng, int(rng.integers(3, 12)))
            normal = lo.apply_to_sphere_points(lo.normalize_moebius(pts), pts)
            moved = lo.apply_to_sphere_points(random_moebius(rng), pts)
            normal_moved = lo.apply_to_sphere_points(lo.normalize_moebius(moved), moved)
            assert np.linalg.norm(normal_moved.sum(axis=0)) <= 1e-9
            assert np.allclose(pairwise(normal), pairwise(normal_moved), atol=1e-9)

    def test_errors(self):
        with pytest.raises(ValueError):
            lo.normalize_moebius([[1, 0, 0], [0, 1, 0]])
        with pytest.raises(ValueError):
            lo.normalize_moebius([[1, 0, 0], [1, 0, 0], [0, 1, 0]])
        with pytest.raises(ValueError):
            lo.normalize_moebius([[1, 0], [0, 1], [1, 1]])


class TestLayoutCube:
    def test_radii(self, cube_solution):
        _, _, result = cube_solution
        radii = [c.radius("spherical") for c in result.circles if c is not None]
        assert len(radii) == 6
        assert np.allclose(radii, CUBE_RADIUS, atol=1e-7)

    def test_cube_corners(self, cube_solution):
        p, _, result = cube_solution
        s = p.surface
        points = {}
        for ov, v in enumerate(result.vertices):
            if v is not None:
                points[ov // 2] = lo.stereographic("plane_to_sphere", v)
        assert sorted(points) == list(range(8))
        adjacent = {frozenset((int(s.vertex_of[4 * k]) // 2, int(s.vertex_of[4 * k + 2]) // 2))
                    for k in range(s.num_edges)}
        for a in range(8):
            for b in range(a + 1, 8):
                dot = points[a] @ points[b]
                if frozenset((a, b)) in adjacent:
                    assert dot == pytest.approx(1 / 3, abs=1e-9)
                else:
                    assert dot == pytest.approx(-1 / 3, abs=1e-9) or dot == pytest.approx(-1, abs=1e-9)

    def test_fidelity(self, cube_solution):
        p, rho, result = cube_solution
        check = lo.check_layout(p, rho, result)
        assert check.worst <= 1e-8
        assert result.holonomy_residual <= 1e-9
        assert result.unreached_faces == []

    def test_json(self, cube_solution):
        _, _, result = cube_solution
        data = json.loads(result.to_json())
        assert set(data) >= {"centers", "vertices", "circles", "holonomy_residual"}
        back = lo.layout_from_dict(data)
        for a, b in zip(back.circles, result.circles):
            assert (a is None) == (b is None)
            if a is not None:
                assert np.allclose(a.matrix, b.matrix)


class TestLayoutTorus:
    @pytest.mark.parametrize("geometry", ["euclidean", "hyperbolic"])
    def test_fidelity(self, torus_solutions, geometry):
        p, rho, result = torus_solutions[geometry]
        assert result.holonomy_residual <= 1e-9
        assert lo.check_layout(p, rho, result).worst <= 1e-8

    def test_euclidean_grid(self, torus_solutions):
        p, _, result = torus_solutions["euclidean"]
        decks = result.deck_transformations
        assert len(decks) >= 2
        for m in decks:
            a, b, c, d = m.unimodular().ravel()
            # pure translations
            assert abs(c) <= 1e-12 and abs(a - d) <= 1e-12
        for m1 in decks:
            for m2 in decks:
                assert lo.commutator_residual(m1, m2) <= 1e-9
        centres = [c.to_complex() for c in result.centers if c is not None]
        gaps = sorted({round(abs(a - b), 9) for a in centres for b in centres if a != b})
        # neighbouring unit-radius orthogonal circles sit sqrt(2) apart
        assert gaps[0] == pytest.approx(math.sqrt(2), abs=1e-9)

    def test_hyperbolic_decks_are_isometries(self, torus_solutions):
        _, _, result = torus_solutions["hyperbolic"]
        assert result.deck_transformations
        for m in result.deck_transformations:
            assert m.is_hyperbolic_isometry(tol=1e-9)


class TestLayoutSingleKite:
    def test_kite_angles(self):
        s = surf.build_from_face_boundaries([[0, -1], [2, -1]])
        theta, rho = 1.1, np.array([0.0, 0.4])
        phi1 = kite_half_angle("euclidean", theta, rho[0], rho[1])
        phi2 = kite_half_angle("euclidean", theta, rho[1], rho[0])
        p = PatternProblem(s, "euclidean", theta, np.array([2 * phi1, 2 * phi2]))
        result = lo.layout_pattern(p, rho)
        kin = lo._Kinematics(p, rho)
        frame_a = result.frames[0]
        frame_b = frame_a @ kin.across(0)
        ca, cb = frame_a(ProjectivePoint(0, 1)), frame_b(ProjectivePoint(0, 1))
        v0 = kin.vertex_point(frame_a, 0)
        v1 = kin.vertex_point(frame_a @ kin.along(0), 0)

        def unsigned(x):
            return min(x, 2 * math.pi - x)

        assert unsigned(lo.angle_at("euclidean", ca, v0, v1)) == pytest.approx(2 * phi1, abs=1e-12)
        assert unsigned(lo.angle_at("euclidean", cb, v0, v1)) == pytest.approx(2 * phi2, abs=1e-12)
        assert unsigned(lo.angle_at("euclidean", v0, ca, cb)) == pytest.approx(theta, abs=1e-12)
        assert unsigned(lo.angle_at("euclidean", v1, ca, cb)) == pytest.approx(theta, abs=1e-12)
        assert abs(result.circles[0].form(v0)) <= 1e-12 and abs(result.circles[2].form(v1)) <= 1e-12


class TestLayoutErrors:
    def test_not_critical(self):
        p = PatternProblem(surf.quad_torus(), "euclidean", math.pi / 2, 2 * math.pi)
        with pytest.raises(ValueError):
            lo.layout_pattern(p, np.array([0.5, 0, 0, 0]))

    def test_disconnected(self):
        rows = surf.quad_torus().rows
        shift = 4 * surf.quad_torus().num_edges
        doubled = [list(r) for r in rows] + [[x + shift for x in r] for r in rows]
        s = surf.build_from_face_boundaries(doubled)
        p = PatternProblem(s, "euclidean", math.pi / 2, 2 * math.pi)
        result = lo.layout_pattern(p, np.zeros(8))
        assert result.unreached_faces == [4, 5, 6, 7]


@settings(max_examples=30)
@given(st.floats(-3, 3), st.floats(0.1, 0.95))
def test_euclidean_translation_is_similarity(angle, t):
    m = lo.rotation(angle) @ lo.translation("euclidean", t)
    a, b, c, d = m.entries
    assert abs(c) <= 1e-15
