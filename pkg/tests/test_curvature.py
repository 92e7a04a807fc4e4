import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nprkit import shapes
from nprkit.animation import quat_from_axis_angle, quat_to_matrix
from nprkit.curvature import (
    CurvatureField,
    SecondForm2x2,
    compute_curvature,
    corner_areas,
    diagonalize_second_form,
    estimate_curvature,
    estimate_curvature_derivative,
    rotate_frame,
)
from nprkit.errors import MissingCurvature
from nprkit.mesh import build_mesh
from oracles import cubic_derivative_oracle


def interior_vertices(surface):
    boundary = set(np.asarray(surface.boundary_edges()).ravel().tolist())
    return np.array([v for v in range(surface.n_vertices) if v not in boundary])


def check_frame(field, normals, tol=1e-6):
    assert np.all(field.k1 >= field.k2)
    assert np.abs(np.einsum("ij,ij->i", field.e1, field.e2)).max() <= tol
    assert np.abs(np.einsum("ij,ij->i", field.e1, normals)).max() <= tol
    assert np.abs(np.einsum("ij,ij->i", field.e2, normals)).max() <= tol
    assert np.allclose(np.linalg.norm(field.e1, axis=1), 1, atol=tol)
    assert np.allclose(np.linalg.norm(field.e2, axis=1), 1, atol=tol)


class TestDiagonalize:
    frame = (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))

    def test_diagonal(self):
        k1, k2, e1, e2 = diagonalize_second_form(SecondForm2x2(2, 0, 1), self.frame)
        assert (k1, k2) == (2, 1)
        assert np.allclose(e1, [1, 0, 0])

    def test_forty_five_degrees(self):
        k1, k2, e1, e2 = diagonalize_second_form(SecondForm2x2(1.5, 0.5, 1.5), self.frame)
        assert k1 == pytest.approx(2) and k2 == pytest.approx(1)
        assert np.allclose(e1, [math.sqrt(0.5), math.sqrt(0.5), 0], atol=1e-15)
        assert np.allclose(np.cross(e1, e2), [0, 0, 1], atol=1e-15)

    def test_umbilic_tie_break(self):
        k1, k2, e1, _ = diagonalize_second_form(SecondForm2x2(0.7, 0, 0.7), self.frame)
        assert k1 == k2 == 0.7
        assert np.array_equal(e1, [1, 0, 0])

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-10, 10), st.floats(-10, 10), st.floats(-10, 10))
    def test_matches_eigh(self, e, f, g):
        k1, k2, e1, _ = diagonalize_second_form(SecondForm2x2(e, f, g), self.frame)
        w = np.linalg.eigvalsh([[e, f], [f, g]])
        assert k1 == pytest.approx(w[1], abs=1e-9) and k2 == pytest.approx(w[0], abs=1e-9)
        M = np.array([[e, f], [f, g]])
        assert np.allclose(M @ e1[:2], k1 * e1[:2], atol=1e-9)


class TestRotateFrame:
    def test_same_normal_is_identity(self):
        u, v = np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]])
        ru, rv = rotate_frame(u, v, np.array([[0, 0, 1.0]]))
        assert np.array_equal(ru, u) and np.array_equal(rv, v)

    def test_antiparallel_flip_is_deterministic(self):
        u, v = np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]])
        ru, rv = rotate_frame(u, v, np.array([[0, 0, -1.0]]))
        assert np.allclose(np.cross(ru, rv), [[0, 0, -1]])
        assert np.allclose(np.linalg.norm(ru, axis=1), 1)

    def test_rotated_frame_is_orthonormal(self):
        rng = np.random.default_rng(0)
        n = rng.normal(size=(50, 3))
        n /= np.linalg.norm(n, axis=1, keepdims=True)
        u = np.tile([1.0, 0, 0], (50, 1))
        v = np.tile([0, 1.0, 0], (50, 1))
        ru, rv = rotate_frame(u, v, n)
        assert np.allclose(np.cross(ru, rv), n, atol=1e-9)


class TestCornerAreas:
    def test_sum_to_face_area(self, ico3):
        ca = corner_areas(ico3.positions, ico3.faces)
        p = ico3.positions[ico3.faces]
        area = 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)
        assert np.allclose(ca.sum(1), area, rtol=1e-12)

    def test_obtuse_triangle_bisector_split(self):
        # corner 2 is obtuse; corner 0 keeps the right triangle with legs L/2 and
        # (L/2) tan(angle at 0), L the edge from corner 0 to corner 2
        p = np.array([[0, 0, 0], [4, 0, 0], [2, 0.5, 0]], dtype=float)
        ca = corner_areas(p, np.array([[0, 1, 2]]))
        half = math.hypot(2, 0.5) / 2
        acute = 0.5 * half * half * (0.5 / 2)
        assert ca[0, 0] == pytest.approx(acute, rel=1e-12)
        assert ca[0, 1] == pytest.approx(acute, rel=1e-12)
        assert ca[0, 2] == pytest.approx(1.0 - 2 * acute, rel=1e-12)

    def test_equilateral_thirds(self):
        p = np.array([[0, 0, 0], [1, 0, 0], [0.5, math.sqrt(3) / 2, 0]])
        ca = corner_areas(p, np.array([[0, 1, 2]]))
        assert np.allclose(ca, math.sqrt(3) / 12, rtol=1e-12)


class TestCurvature:
    def test_flat_grid(self):
        s = shapes.grid(12, 12)
        c = compute_curvature(s)
        iv = interior_vertices(s)
        assert np.abs(c.k1[iv]).max() <= 1e-9 and np.abs(c.k2[iv]).max() <= 1e-9
        assert np.abs(c.dcurv[iv]).max() <= 1e-9

    def test_icosphere_accuracy(self, ico4):
        c = estimate_curvature(ico4)
        assert np.mean(np.abs(c.k1 - 1)) < 0.05
        assert np.mean(np.abs(c.k2 - 1)) < 0.05
        check_frame(c, ico4.normals)

    def test_refinement_convergence(self):
        errs = []
        for k in (2, 3, 4):
            c = estimate_curvature(shapes.icosphere(k))
            errs.append(np.mean(np.abs(np.concatenate([c.k1, c.k2]) - 1)))
        assert errs[0] > errs[1] > errs[2]

    def test_icosphere_convex(self, ico3):
        assert estimate_curvature(ico3).k2.min() > 0

    def test_cylinder(self):
        s = shapes.cylinder(0.5, n_around=96, n_along=48)
        c = estimate_curvature(s)
        mid = np.flatnonzero(np.abs(s.positions[:, 2]) < 0.8)
        assert np.abs(c.k1[mid] - 2.0).max() <= 0.04
        assert np.abs(c.k2[mid]).max() <= 0.02
        assert np.abs(c.e2[mid, 2]).min() >= math.cos(math.radians(2))

    def test_trace_preserved(self, torus):
        c = estimate_curvature(torus)
        assert np.abs(c.k1 + c.k2 - (c.tensor[:, 0] + c.tensor[:, 2])).max() <= 1e-12

    def test_scale_covariance(self, torus):
        c = estimate_curvature(torus)
        big = build_mesh(torus.positions * 3.0, torus.faces)
        cb = estimate_curvature(big)
        assert np.allclose(cb.k1 * 3.0, c.k1, rtol=1e-9, atol=1e-12)
        assert np.allclose(cb.k2 * 3.0, c.k2, rtol=1e-9, atol=1e-12)

    @settings(max_examples=10, deadline=None)
    @given(
        st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(lambda a: sum(x * x for x in a) > 1e-2),
        st.floats(-math.pi, math.pi),
        st.tuples(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3)),
    )
    def test_rigid_invariance(self, axis, angle, shift):
        s = shapes.torus(n_major=24, n_minor=12)
        c = estimate_curvature(s)
        R = quat_to_matrix(quat_from_axis_angle(axis, angle))
        moved = build_mesh(s.positions @ R.T + shift, s.faces)
        cm = estimate_curvature(moved)
        assert np.abs(cm.k1 - c.k1).max() <= 1e-9
        assert np.abs(cm.k2 - c.k2).max() <= 1e-9
        # principal directions are defined up to sign
        dots = np.abs(np.einsum("ij,ij->i", cm.e1, c.e1 @ R.T))
        assert dots.min() >= 1 - 1e-6

    def test_field_attaches_to_surface(self):
        s = shapes.icosphere(1)
        c = compute_curvature(s)
        assert np.array_equal(s.property("vertex", "k1").data, c.k1)
        assert s.property("vertex", "dcurv").data.shape == (s.n_vertices, 4)
        assert s.curvature is c
        compute_curvature(s)  # re-attaching replaces the properties

    def test_degenerate_face_warns(self):
        p = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [2, 0, 0]]
        with pytest.warns(UserWarning):
            estimate_curvature(build_mesh(p, [[0, 1, 2], [0, 3, 1]]))


class TestDerivative:
    def test_missing_curvature(self):
        with pytest.raises(MissingCurvature):
            estimate_curvature_derivative(shapes.tetrahedron(), None)

    def test_cubic_height_field(self):
        s = shapes.grid(40, 40, size=0.4, height=lambda x, y: x**3)
        c = compute_curvature(s, attach=False)
        origin = 20 * 41 + 20
        assert np.allclose(s.positions[origin], 0)
        got = c.dcurv[origin]
        expect = cubic_derivative_oracle(c.e1[origin], c.e2[origin])
        assert np.linalg.norm(got - expect) <= 0.1 * np.linalg.norm(expect)

    def test_icosphere_derivative_small(self, ico4):
        c = compute_curvature(ico4, attach=False)
        assert np.linalg.norm(c.dcurv, axis=1).max() < 0.1

    def test_derivative_shrinks_with_refinement(self):
        means = [np.linalg.norm(compute_curvature(shapes.icosphere(k), attach=False).dcurv, axis=1).mean() for k in (2, 3, 4)]
        assert means[0] > means[1] > means[2]

    def test_stamped_field_type(self, ico3):
        assert isinstance(compute_curvature(ico3, attach=False), CurvatureField)
