import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circlepatterns import surface as surf
from circlepatterns.surface import SENTINEL, Subcomplex, iota, tau

from oracles import betti_dense

CLOSED = {
    "cube": surf.cube,
    "tetrahedron": surf.tetrahedron,
    "dodecahedron": surf.dodecahedron,
    "icosahedron": surf.icosahedron,
    "projectivized_cube": surf.projectivized_cube,
    "quad_torus": surf.quad_torus,
    "torus3x2": lambda: surf.torus_grid(3, 2),
    "prism5": lambda: surf.prism(5),
    "truncated_cube": surf.truncated_cube_orthogonal,
}
ALL = {**CLOSED, "quadmesh": surf.quad_mesh, "hexgrid": surf.hex_grid,
       "disc": surf.disc_triangle}


def counts(s):
    return s.num_faces, s.num_edges, s.num_vertices


class TestConstruction:
    def test_cube_counts(self):
        assert counts(surf.build_from_face_boundaries(surf.CUBE_ROWS)) == (6, 12, 8)
        assert surf.summary(surf.cube()) == "Surface has 6 faces, 12 edges, and 8 vertices"

    def test_disc_table(self):
        d = surf.build_from_face_boundaries([[0, 4, 8]])
        assert counts(d) == (1, 3, 3)
        assert d.left_face(0) == 0 and d.right_face(0) == SENTINEL
        assert d.left_face(2) == SENTINEL and d.right_face(2) == 0
        assert d.left_face(3) == 1 and d.has_boundary
        assert not d.is_boundary_face(0) and not d.edge_is_interior(0)

    def test_empty(self):
        assert counts(surf.build_from_face_boundaries([])) == (0, 0, 0)

    def test_projectivized_cube(self):
        p = surf.projectivized_cube()
        assert counts(p) == (3, 6, 4)
        assert p.euler_characteristic == 1

    @pytest.mark.parametrize("rows, fragment", [
        ([[0, 4], [0, 8]], "duplicate"),
        ([[0, 4], [3, 8]], "parity"),
        ([[0, 8]], "orphan"),
        ([[SENTINEL]], "without edges"),
        ([[0, -5]], "negative"),
        ([[0, 1.5]], "non-integer"),
    ])
    def test_rejects(self, rows, fragment):
        with pytest.raises(ValueError, match=fragment):
            surf.build_from_face_boundaries(rows)

    def test_json_round_trip(self):
        c = surf.cube()
        back = surf.from_json(c.to_json())
        assert back == c and json.loads(c.to_json())["faces"][0] == [0, 4, 8, 12]
        with pytest.raises(ValueError):
            surf.from_json("{}")

    def test_immutable(self):
        c = surf.cube()
        with pytest.raises(AttributeError):
            c.num_faces = 3
        with pytest.raises(ValueError):
            c.sigma[0] = 5

    def test_polygons(self):
        s = surf.from_polygons([[0, 1, 2], [0, 2, 3]])
        assert counts(s) == (2, 1, 2)
        with pytest.raises(ValueError):
            surf.from_polygons([[0, 1, 2], [0, 1, 3]])

    @pytest.mark.parametrize("name, expected", [
        ("quadmesh", (16, 24, 21)), ("hexgrid", (19, 42, 36)), ("truncated_cube", (38, 72, 36)),
        ("dodecahedron", (12, 30, 20)), ("icosahedron", (20, 30, 12)), ("quad_torus", (4, 8, 4)),
    ])
    def test_named_counts(self, name, expected):
        assert counts(surf.named_surface(name)) == expected

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            surf.named_surface("moebius_band")


class TestNavigation:
    def test_cube_examples(self):
        c = surf.cube()
        assert c.next_left(0) == 4
        assert c.right_face(0) == 2
        assert c.navigate("next_left", 0) == 4
        with pytest.raises(ValueError):
            c.navigate("sideways", 0)
        with pytest.raises(IndexError):
            c.next_left(48)

    @pytest.mark.parametrize("name", sorted(ALL))
    def test_structural_invariants(self, name):
        s = ALL[name]()
        n = s.num_oriented_edges
        for e in range(n):
            assert iota(iota(e)) == e and iota(e) != e and tau(tau(e)) == e
            nxt = s.sigma[e]
            if nxt != SENTINEL:
                assert s.sigma_inv[nxt] == e
                assert s.face_of[nxt] == s.face_of[e]
                # sheet swap conjugation
                assert s.sigma[iota(tau(nxt))] == iota(tau(e))
            prv = s.prev_left(e)
            if prv != SENTINEL:
                assert s.next_left(prv) == e
            if s.face_of[e] != SENTINEL:
                # the mirrored edge borders the same face with opposite orientation
                assert s.face_of[e ^ 3] == s.face_of[e] ^ 1
            assert s.vertex_of[e] // 2 == s.vertex_of[tau(e)] // 2

    @pytest.mark.parametrize("name", sorted(CLOSED))
    def test_vertex_orbits(self, name):
        s = CLOSED[name]()
        for v in range(2 * s.num_vertices):
            cycle = s.vertex_edges(v)
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                assert b == iota(int(s.sigma_inv[a]))
                assert s.vertex_of[b] == v

    def test_face_cycles(self):
        c = surf.cube()
        assert c.face_edges(0) == [0, 4, 8, 12]
        assert all(c.face_degree(f) == 4 for f in range(6))
        assert all(c.vertex_degree(v) == 3 for v in range(8))


class TestDualAndMedial:
    def test_dual_counts(self):
        d = surf.poincare_dual(surf.dodecahedron())
        assert counts(d) == (20, 30, 12)

    def test_dual_of_cube_is_octahedral(self):
        d = surf.poincare_dual(surf.cube())
        assert counts(d) == (8, 12, 6)
        assert all(d.face_degree(f) == 3 for f in range(8))

    def test_double_dual(self):
        c = surf.cube()
        assert surf.isomorphic(surf.poincare_dual(surf.poincare_dual(c)), c)

    def test_isomorphism_negative(self):
        assert not surf.isomorphic(surf.cube(), surf.prism(5))
        assert not surf.isomorphic(surf.cube(), surf.poincare_dual(surf.cube()))

    def test_prism4_is_cube(self):
        assert surf.isomorphic(surf.prism(4), surf.cube())

    def test_medial_cube(self):
        m = surf.medial(surf.cube())
        assert counts(m) == (14, 24, 12)
        assert m.euler_characteristic == 2
        assert all(m.vertex_degree(v) == 4 for v in range(m.num_vertices))

    def test_boundary_rejected(self):
        with pytest.raises(ValueError):
            surf.poincare_dual(surf.quad_mesh())


class TestMoves:
    def test_split_along(self):
        s, new = surf.apply_move(surf.cube(), "split_edge_along", 0)
        assert counts(s) == (7, 13, 8)
        assert new == 48 and s.face_degree(6) == 2

    def test_split_across(self):
        s, _ = surf.apply_move(surf.cube(), "split_edge_across", 0)
        assert counts(s) == (6, 13, 9)

    def test_contract(self):
        s, _ = surf.apply_move(surf.cube(), "contract_edge", 0)
        assert counts(s) == (6, 11, 7)

    def test_truncate(self):
        s, face = surf.apply_move(surf.cube(), "truncate_vertex", 0)
        assert counts(s) == (7, 15, 10)
        assert s.face_degree(face) == 3

    @pytest.mark.parametrize("edge", [0, 4, 16, 34])
    def test_slide_round_trip(self, edge):
        c = surf.cube()
        once, _ = surf.slide_edge_left(c, edge)
        assert counts(once) == counts(c)
        back, _ = surf.slide_edge_right(once, edge)
        assert surf.isomorphic(back, c)

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(["split_edge_along", "split_edge_across", "slide_edge_left",
                            "slide_edge_right"]), st.integers(0, 47))
    def test_moves_preserve_euler_characteristic(self, move, target):
        c = surf.cube()
        s, _ = surf.apply_move(c, move, target)
        assert s.euler_characteristic == 2
        assert surf.betti_numbers(s) == (1, 0, 1)

    def test_unknown_move(self):
        with pytest.raises(ValueError):
            surf.apply_move(surf.cube(), "flip", 0)


class TestHomology:
    @pytest.mark.parametrize("name, expected", [
        ("cube", (1, 0, 1)), ("projectivized_cube", (1, 1, 1)), ("quad_torus", (1, 2, 1)),
    ])
    def test_betti(self, name, expected):
        s = CLOSED[name]()
        assert surf.betti_numbers(s) == expected
        assert betti_dense(s) == expected

    @pytest.mark.parametrize("name", sorted(CLOSED))
    def test_betti_matches_dense_oracle(self, name):
        s = CLOSED[name]()
        assert surf.betti_numbers(s) == betti_dense(s)
        h0, h1, h2 = betti_dense(s)
        assert h0 - h1 + h2 == s.euler_characteristic

    def test_requires_closed(self):
        with pytest.raises(ValueError):
            surf.betti_numbers(surf.quad_mesh())

    @settings(max_examples=50, deadline=None)
    @given(st.sampled_from(sorted(CLOSED)), st.randoms(use_true_random=False))
    def test_general_euler(self, name, rnd):
        s = CLOSED[name]()
        edges = {k for k in range(s.num_edges) if rnd.random() < 0.4}
        vertices = {int(s.vertex_of[4 * k + j]) // 2 for k in edges for j in (0, 2)}
        vertices |= {v for v in range(s.num_vertices) if rnd.random() < 0.2}
        if not vertices:
            vertices = {0}
        report = surf.general_euler(s, Subcomplex(edges, vertices))
        assert report.holds
        assert report.handles >= 0 and report.regions >= 1

    def test_general_euler_examples(self):
        c = surf.cube()
        one_vertex = surf.general_euler(c, Subcomplex((), {0}))
        assert (one_vertex.regions, one_vertex.handles) == (1, 0)
        t = surf.quad_torus()
        point = surf.general_euler(t, Subcomplex((), {0}))
        assert point.handles == 2 and point.holds
        _, report = surf.homology(c, Subcomplex((), {0}))
        assert report.lhs == report.rhs

    def test_subcomplex_validation(self):
        c = surf.cube()
        with pytest.raises(ValueError):
            surf.general_euler(c, Subcomplex())
        with pytest.raises(ValueError):
            surf.general_euler(c, Subcomplex({0}, set()))

    def test_simple_connectivity(self):
        assert surf.is_simply_connected(surf.cube())
        assert not surf.is_simply_connected(surf.quad_torus())
        assert surf.is_simply_connected(surf.quad_mesh())
        assert not surf.is_simply_connected(surf.projectivized_cube())


class TestPuncture:
    def test_cube_corner(self):
        c = surf.cube()
        theta = np.full(c.num_edges, 2 * math.pi / 3)
        p = surf.puncture_at_vertex(c, 0, theta)
        assert p.surface.num_faces == 3
        assert np.allclose(p.phi, 2 * math.pi / 3)
        for f in range(3):
            assert p.surface.is_boundary_face(f)

    def test_single_removed_side(self):
        s = surf.prism(6)
        theta = np.full(s.num_edges, math.pi / 2)
        p = surf.puncture_at_vertex(s, 0, theta)
        # faces losing exactly one side get 2 pi - pi
        lost = [phi for phi in p.phi if abs(phi - math.pi) < 1e-12]
        assert lost

    def test_angle_bookkeeping(self):
        s = surf.dodecahedron()
        rng = np.random.default_rng(3)
        theta = rng.uniform(0.3, 2.8, s.num_edges)
        p = surf.puncture_at_vertex(s, 5, theta)
        kept = set(p.edge_map)
        for new_face, old_face in enumerate(p.face_map):
            dropped = [x // 4 for x in s.rows[old_face] if x // 4 not in kept]
            expected = 2 * math.pi - 2 * np.sum(math.pi - theta[dropped])
            assert p.phi[new_face] == pytest.approx(expected, abs=1e-13)
        assert np.array_equal(p.theta, theta[list(p.edge_map)])

    def test_errors(self):
        c = surf.cube()
        with pytest.raises(IndexError):
            surf.puncture_at_vertex(c, 99, np.full(12, 1.0))
        with pytest.raises(ValueError):
            surf.puncture_at_vertex(c, 0, np.full(11, 1.0))
