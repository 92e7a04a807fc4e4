import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nprkit import shapes
from nprkit.animation import (
    Bone,
    MeshState,
    Skeleton,
    SkinnedSurface,
    Track,
    Transform,
    VertexAnimatedSurface,
    as_state,
    deform,
    interpolate_keyframes,
    pose_skeleton,
    quat_from_axis_angle,
    quat_to_matrix,
    skin_vertices,
    slerp,
)
from nprkit.errors import BadPose, TimeOutOfRange, UnknownAnimation
from nprkit.mesh import build_mesh


def keyframed(values, mode="linear"):
    """Single-vertex surface whose x coordinate takes ``values`` over the keyframes."""
    base = build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    P = np.repeat(base.positions[None], len(values), axis=0).copy()
    P[:, 0, 0] = values
    N = np.repeat(base.normals[None], len(values), axis=0)
    return VertexAnimatedSurface(base, P, N, interpolation=mode)


def wobbling_sphere(n=4, mode="linear"):
    base = shapes.icosphere(1)
    rng = np.random.default_rng(7)
    P = np.stack([base.positions * (1 + 0.1 * rng.standard_normal((base.n_vertices, 1))) for _ in range(n)])
    N = np.stack([base.normals for _ in range(n)])
    return VertexAnimatedSurface(base, P, N, interpolation=mode)


class TestKeyframes:
    def test_endpoint_bitwise_linear(self):
        a = wobbling_sphere()
        for k in range(a.n_keyframes):
            s = interpolate_keyframes(a, "default", float(k))
            assert np.array_equal(s.positions, a.positions[k])

    def test_control_points_catmull_rom(self):
        a = wobbling_sphere(mode="catmull-rom")
        for k in range(a.n_keyframes):
            s = interpolate_keyframes(a, "default", float(k))
            assert np.abs(s.positions - a.positions[k]).max() <= 1e-6

    def test_linear_midpoint(self):
        a = keyframed([0.0, 2.0])
        assert interpolate_keyframes(a, "default", 0.5).positions[0].tolist() == [1.0, 0.0, 0.0]

    def test_catmull_rom_hand_value(self):
        a = keyframed([0.0, 1.0, 3.0, 4.0], mode="catmull-rom")
        assert interpolate_keyframes(a, "default", 1.5).positions[0, 0] == pytest.approx(2.0, abs=1e-12)

    def test_catmull_rom_clamps_endpoints(self):
        # first segment duplicates frame 0: weights (w0 + w1) on P0
        a = keyframed([0.0, 1.0, 5.0], mode="catmull-rom")
        u = 0.25
        w = [(-u**3 + 2 * u**2 - u) / 2, (3 * u**3 - 5 * u**2 + 2) / 2, (-3 * u**3 + 4 * u**2 + u) / 2, (u**3 - u**2) / 2]
        expect = (w[0] + w[1]) * 0.0 + w[2] * 1.0 + w[3] * 5.0
        assert interpolate_keyframes(a, "default", u).positions[0, 0] == pytest.approx(expect, abs=1e-12)
        # last segment duplicates the final frame
        t = 1.5
        u = 0.5
        w = [(-u**3 + 2 * u**2 - u) / 2, (3 * u**3 - 5 * u**2 + 2) / 2, (-3 * u**3 + 4 * u**2 + u) / 2, (u**3 - u**2) / 2]
        expect = w[0] * 0.0 + w[1] * 1.0 + (w[2] + w[3]) * 5.0
        assert interpolate_keyframes(a, "default", t).positions[0, 0] == pytest.approx(expect, abs=1e-12)

    def test_time_out_of_range(self):
        a = keyframed([0.0, 1.0])
        with pytest.raises(TimeOutOfRange):
            interpolate_keyframes(a, "default", 1.5)
        with pytest.raises(TimeOutOfRange):
            interpolate_keyframes(a, "default", -0.1)

    def test_unknown_animation(self):
        with pytest.raises(UnknownAnimation):
            interpolate_keyframes(keyframed([0.0, 1.0]), "run", 0.0)

    def test_named_range_offsets(self):
        a = wobbling_sphere(4)
        a.animations = {"b": (2, 3)}
        s = interpolate_keyframes(a, "b", 0.0)
        assert np.array_equal(s.positions, a.positions[2])
        assert a.frame_count("b") == 2

    def test_opposite_normals_fall_back(self):
        base = build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
        P = np.stack([base.positions, base.positions])
        N = np.stack([base.normals, -base.normals])
        a = VertexAnimatedSurface(base, P, N)
        s = interpolate_keyframes(a, "default", 0.5)
        assert np.array_equal(s.normals, base.normals)

    def test_mismatched_keyframe_rejected(self):
        base = shapes.tetrahedron()
        with pytest.raises(ValueError):
            VertexAnimatedSurface(base, np.zeros((2, 3, 3)), np.zeros((2, 3, 3)))

    def test_bad_range_rejected(self):
        base = shapes.tetrahedron()
        P = np.stack([base.positions] * 2)
        with pytest.raises(ValueError):
            VertexAnimatedSurface(base, P, P, animations={"x": (1, 2)})

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.0, 3.0), st.sampled_from(["linear", "catmull-rom"]))
    def test_state_invariants(self, t, mode):
        a = wobbling_sphere(mode=mode)
        s = interpolate_keyframes(a, "default", t)
        assert s.n_vertices == a.surface.n_vertices
        assert np.allclose(np.linalg.norm(s.normals, axis=1), 1.0, atol=1e-6)
        assert s.faces is a.surface.faces


class TestQuaternions:
    def test_axis_angle_matrix(self):
        R = quat_to_matrix(quat_from_axis_angle([0, 0, 1], math.pi / 2))
        assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)

    def test_slerp_halfway(self):
        q0 = quat_from_axis_angle([0, 0, 1], 0.0)
        q1 = quat_from_axis_angle([0, 0, 1], 1.2)
        assert np.allclose(slerp(q0, q1, 0.5), quat_from_axis_angle([0, 0, 1], 0.6), atol=1e-12)

    def test_slerp_takes_shortest_arc(self):
        q0 = quat_from_axis_angle([0, 0, 1], 0.0)
        q1 = -quat_from_axis_angle([0, 0, 1], 1.0)
        r = slerp(q0, q1, 0.5)
        R = quat_to_matrix(r)
        assert np.allclose(R, quat_to_matrix(quat_from_axis_angle([0, 0, 1], 0.5)), atol=1e-12)

    def test_nearly_parallel_is_unit(self):
        q0 = quat_from_axis_angle([1, 0, 0], 0.0)
        q1 = quat_from_axis_angle([1, 0, 0], 1e-4)
        assert np.linalg.norm(slerp(q0, q1, 0.3)) == pytest.approx(1.0, abs=1e-15)

    def test_transform_inverse(self):
        T = Transform(tuple(quat_from_axis_angle([1, 2, 3], 0.7)), (1.0, -2.0, 0.5))
        p = np.array([[0.3, 0.2, -1.0]])
        assert np.allclose(T.inverse().apply(T.apply(p)), p, atol=1e-14)


def two_bone(weights=None):
    """Strip along x; root at the origin, child one unit along +x."""
    surface = build_mesh(
        [[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0], [1, 1, 0], [2, 1, 0]],
        [[0, 1, 4], [0, 4, 3], [1, 2, 5], [1, 5, 4]],
    )
    skel = Skeleton([Bone("root", None, Transform()), Bone("tip", 0, Transform.from_translation((1, 0, 0)))])
    if weights is None:
        weights = [[1, 0], [0.5, 0.5], [0, 1], [1, 0], [0.5, 0.5], [0, 1]]
    tracks = {
        1: Track([0.0, 1.0], [[1, 0, 0, 0], quat_from_axis_angle([0, 0, 1], math.pi / 2)], [[1, 0, 0], [1, 0, 0]]),
    }
    return SkinnedSurface(surface, skel, weights, {"bend": tracks})


class TestSkeleton:
    def test_identity_locals(self):
        skel = Skeleton([Bone("a", None, Transform()), Bone("b", 0, Transform())])
        for g in pose_skeleton(skel, {}, 0.0):
            assert g.rotation == (1.0, 0.0, 0.0, 0.0)
            assert np.allclose(g.translation, 0)

    def test_chain_composition(self):
        skel = Skeleton(
            [Bone("a", None, Transform.from_translation((1, 0, 0))), Bone("b", 0, Transform.from_translation((0, 1, 0)))]
        )
        g = pose_skeleton(skel, {}, 0.0)
        assert np.allclose(g[1].translation, [1, 1, 0], atol=1e-15)

    def test_track_clamps(self):
        tr = Track([1.0, 2.0], [[1, 0, 0, 0], [1, 0, 0, 0]], [[3, 0, 0], [5, 0, 0]])
        assert tr.sample(0.0).translation == (3.0, 0.0, 0.0)
        assert tr.sample(9.0).translation == (5.0, 0.0, 0.0)
        assert np.allclose(tr.sample(1.5).translation, [4, 0, 0])

    def test_parent_order_enforced(self):
        with pytest.raises(ValueError):
            Skeleton([Bone("a", 1, Transform()), Bone("b", None, Transform())])

    def test_track_times_increasing(self):
        with pytest.raises(ValueError):
            Track([1.0, 1.0], [[1, 0, 0, 0]] * 2, [[0, 0, 0]] * 2)


class TestSkinning:
    def test_bind_pose_identity(self):
        s = two_bone()
        out = skin_vertices(s, s.skeleton.bind_globals())
        assert np.abs(out.positions - s.surface.positions).max() <= 1e-6
        assert np.abs(out.normals - s.surface.normals).max() <= 1e-6

    def test_single_bone_translation(self):
        s = two_bone(weights=[[1, 0]] * 6)
        d = Transform.from_translation((0.5, -2.0, 3.0))
        pose = [d.compose(g) for g in s.skeleton.bind_globals()]
        out = skin_vertices(s, pose)
        assert np.allclose(out.positions, s.surface.positions + [0.5, -2.0, 3.0], atol=1e-12)

    def test_half_half_blend(self):
        surface = build_mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
        skel = Skeleton([Bone("a", None, Transform()), Bone("b", None, Transform())])
        s = SkinnedSurface(surface, skel, [[0.5, 0.5], [1, 0], [0, 1]])
        pose = [Transform.from_translation((2, 0, 0)), Transform.from_translation((0, 2, 0))]
        assert np.allclose(skin_vertices(s, pose).positions[0], [1, 1, 0], atol=1e-15)

    def test_bend_moves_tip(self):
        s = two_bone()
        out = deform(s, "bend", 1.0)
        assert np.allclose(out.positions[2], [1, 1, 0], atol=1e-12)
        assert np.allclose(out.positions[0], [0, 0, 0], atol=1e-15)

    def test_bad_pose(self):
        s = two_bone()
        with pytest.raises(BadPose):
            skin_vertices(s, [Transform()])

    def test_unknown_animation(self):
        with pytest.raises(UnknownAnimation):
            deform(two_bone(), "walk", 0.0)

    def test_weights_validated(self):
        with pytest.raises(ValueError):
            two_bone(weights=[[0.7, 0.7]] * 6)
        with pytest.raises(ValueError):
            two_bone(weights=[[1.5, -0.5]] * 6)

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(0.0, 1.0),
        st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)).filter(lambda a: sum(x * x for x in a) > 1e-3),
        st.floats(-math.pi, math.pi),
        st.tuples(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5)),
    )
    def test_rigid_motion_commutes(self, t, axis, angle, shift):
        s = two_bone()
        pose = pose_skeleton(s.skeleton, s.tracks("bend"), t)
        R = Transform(tuple(quat_from_axis_angle(axis, angle)), shift)
        plain = skin_vertices(s, pose)
        moved = skin_vertices(s, [R.compose(g) for g in pose])
        expect = R.apply(plain.positions)
        scale = max(1.0, np.abs(expect).max())
        assert np.abs(moved.positions - expect).max() <= 1e-5 * scale
        assert np.allclose(np.linalg.norm(moved.normals, axis=1), 1.0, atol=1e-6)


def test_as_state():
    s = shapes.tetrahedron()
    st_ = as_state(s)
    assert isinstance(st_, MeshState) and st_.positions is s.positions
    assert as_state(st_) is st_
    with pytest.raises(TypeError):
        as_state(3)


def test_deform_rejects_static():
    with pytest.raises(TypeError, match="not animated"):
        deform(shapes.tetrahedron(), "x", 0.0)
