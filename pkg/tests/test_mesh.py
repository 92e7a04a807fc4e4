import numpy as np
import pytest
from hypothesis import given, settings

from conftest import hull_mesh, hull_points
from nprkit import shapes
from nprkit.errors import (
    DegenerateTriangle,
    DuplicateName,
    EmptyMesh,
    IndexOutOfRange,
    InvalidVertex,
    NonManifoldEdge,
    UnknownProperty,
)
from nprkit.mesh import (
    BOUNDARY,
    Material,
    build_mesh,
    compute_bounding_sphere,
    compute_feature_size,
    property_table,
    vertex_faces,
    vertex_one_ring,
)
from oracles import brute_neighbors, undirected_edges


def check_halfedge_invariants(s):
    h = np.arange(s.n_halfedges)
    opp = s.he_opposite
    assert np.array_equal(opp[opp], h)
    assert np.array_equal(s.he_origin[opp], s.destination(h))
    interior = np.flatnonzero(s.he_face >= 0)
    nxt = s.he_next
    assert np.array_equal(nxt[nxt[nxt[interior]]], interior)
    assert np.all(nxt[interior] != interior)


class TestBuildMesh:
    def test_tetrahedron_euler(self):
        s = shapes.tetrahedron()
        assert (s.n_vertices, s.n_edges, s.n_faces) == (4, 6, 4)
        assert s.euler_characteristic() == 2
        check_halfedge_invariants(s)

    def test_single_triangle(self):
        s = build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
        assert s.n_halfedges == 6
        assert np.count_nonzero(s.he_face >= 0) == 3
        assert np.count_nonzero(s.he_face == BOUNDARY) == 3
        assert s.n_faces == 1
        check_halfedge_invariants(s)
        assert len(s.boundary_edges()) == 3

    def test_third_face_on_edge_is_nonmanifold(self):
        p = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1]]
        with pytest.raises(NonManifoldEdge):
            build_mesh(p, [[0, 1, 2], [1, 0, 3], [0, 1, 4]])

    def test_flipped_neighbour_is_rejected(self):
        p = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]
        with pytest.raises(NonManifoldEdge):
            build_mesh(p, [[0, 1, 2], [1, 2, 3]])

    def test_repeated_index(self):
        with pytest.raises(DegenerateTriangle):
            build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 1]])

    def test_index_out_of_range(self):
        with pytest.raises(IndexOutOfRange):
            build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 3]])

    @pytest.mark.parametrize("surface,chi", [(shapes.icosphere(2), 2), (shapes.torus(), 0), (shapes.octahedron(), 2)])
    def test_euler_characteristic(self, surface, chi):
        assert surface.euler_characteristic() == chi
        check_halfedge_invariants(surface)

    def test_round_trip_faces(self):
        s = shapes.icosphere(1)
        for f, tri in enumerate(s.faces):
            h = s.face_he[f]
            walk = [int(s.he_origin[h]), int(s.he_origin[s.he_next[h]]), int(s.he_origin[s.he_next[s.he_next[h]]])]
            assert walk == tri.tolist()

    def test_flat_grid_normals(self):
        s = shapes.grid(6, 5)
        assert np.abs(s.normals - [0, 0, 1]).max() <= 1e-12

    def test_normals_are_area_weighted(self):
        # apex of two faces with areas 1 and 3 (times 1/2): weights follow area
        p = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 3]]
        s = build_mesh(p, [[0, 1, 2], [0, 3, 1]])
        n1, n2 = np.array([0, 0, 1.0]), np.array([0, 1.0, 0])
        expect = 0.5 * n1 + 1.5 * n2
        assert np.allclose(s.normals[0], expect / np.linalg.norm(expect), atol=1e-12)

    def test_file_normals_override(self):
        s = build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]], normals=[[0, 0, 2]] * 3)
        assert np.array_equal(s.normals, [[0, 0, 1.0]] * 3)


class TestOneRing:
    def test_fan_apex_in_winding_order(self):
        s = shapes.fan(6)
        ring = vertex_one_ring(s, 0)
        assert len(ring) == 6
        k = ring.index(1)
        assert ring[k:] + ring[:k] == [1, 2, 3, 4, 5, 6]

    def test_boundary_corner(self):
        s = build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
        assert sorted(vertex_one_ring(s, 0)) == [1, 2]

    def test_boundary_fan_is_open(self):
        s = shapes.fan(6)
        ring = vertex_one_ring(s, 1)
        assert sorted(ring) == [0, 2, 6]
        assert ring[1] == 0  # apex between the two rim neighbours

    def test_icosahedron_valence(self):
        s = shapes.icosahedron()
        for v in range(s.n_vertices):
            ring = vertex_one_ring(s, v)
            assert len(ring) == 5
            assert set(ring) == brute_neighbors(s.faces, v)

    def test_invalid_vertex(self):
        with pytest.raises(InvalidVertex):
            vertex_one_ring(shapes.tetrahedron(), 4)

    def test_vertex_faces_match_ring(self):
        s = shapes.icosphere(1)
        for v in range(s.n_vertices):
            fs = vertex_faces(s, v)
            assert sorted(fs) == sorted(np.flatnonzero((s.faces == v).any(1)).tolist())


class TestBoundingSphereAndFeatureSize:
    def test_single_vertex(self):
        s = build_mesh([[1.0, 2.0, 3.0]], np.zeros((0, 3), int))
        c, r = compute_bounding_sphere(s)
        assert np.array_equal(c, [1, 2, 3]) and r == 0

    def test_cube_radius_bounds(self):
        s = shapes.cube(1.0)
        c, r = compute_bounding_sphere(s)
        assert np.sqrt(3) / 2 - 1e-12 <= r <= np.sqrt(3) + 1e-12
        assert np.all(np.linalg.norm(s.positions - c, axis=1) <= r * (1 + 1e-9))

    def test_empty_mesh(self):
        with pytest.raises(EmptyMesh):
            build_mesh(np.zeros((0, 3)), np.zeros((0, 3), int))

    def test_equilateral_feature_size(self):
        s = build_mesh([[0, 0, 0], [1, 0, 0], [0.5, np.sqrt(3) / 2, 0]], [[0, 1, 2]])
        assert compute_feature_size(s) == pytest.approx(1.0, abs=1e-15)

    def test_feature_size_scales(self):
        s = shapes.icosphere(2)
        t = build_mesh(s.positions * 2.5, s.faces)
        assert compute_feature_size(t) == pytest.approx(2.5 * compute_feature_size(s), rel=1e-12)

    def test_feature_size_direct_sum(self, ico3):
        total, n = 0.0, 0
        for e in undirected_edges(ico3.faces):
            a, b = tuple(e)
            total += np.linalg.norm(ico3.positions[a] - ico3.positions[b])
            n += 1
        assert ico3.feature_size == pytest.approx(total / n, rel=1e-12)


class TestProperties:
    def test_set_get(self):
        s = shapes.tetrahedron()
        h = property_table(s, "vertex", "kr")
        h[0] = 1.5
        assert s.property("vertex", "kr")[0] == 1.5

    def test_default_zero(self):
        s = shapes.tetrahedron()
        h = s.add_property("face", "w")
        assert np.all(h.data == 0) and len(h.data) == 4

    def test_duplicate(self):
        s = shapes.tetrahedron()
        s.add_property("edge", "x")
        with pytest.raises(DuplicateName):
            s.add_property("edge", "x")

    def test_unknown(self):
        with pytest.raises(UnknownProperty):
            shapes.tetrahedron().property("vertex", "nope")

    def test_remove(self):
        s = shapes.tetrahedron()
        s.add_property("vertex", "t")
        s.remove_property("vertex", "t")
        assert not s.has_property("vertex", "t")


def test_material_clamps():
    m = Material(diffuse=(2.0, -1.0, 0.5))
    assert m.diffuse == (1.0, 0.0, 0.5)


@settings(max_examples=40, deadline=None)
@given(hull_points())
def test_hull_meshes_satisfy_invariants(points):
    s = hull_mesh(points)
    check_halfedge_invariants(s)
    assert s.euler_characteristic() == 2
    assert len(s.boundary_edges()) == 0
    assert np.allclose(np.linalg.norm(s.normals, axis=1), 1.0, atol=1e-6)
    c, r = s.bounding_sphere
    assert np.all(np.linalg.norm(s.positions - c, axis=1) <= r + 1e-9 * r)
    for v in range(s.n_vertices):
        assert set(vertex_one_ring(s, v)) == brute_neighbors(s.faces, v)
    # interior edges: the two faces traverse the edge in opposite directions
    for h in range(3 * s.n_faces):
        o = s.he_opposite[h]
        assert s.he_origin[o] == s.destination(h) and s.destination(o) == s.he_origin[h]
