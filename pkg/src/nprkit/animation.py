"""CPU deformation of animated surfaces.

Two kinds of animation share one static connectivity:

* vertex-animated surfaces store whole keyframes and interpolate between them;
* skinned surfaces deform a bind-pose mesh with a bone hierarchy using linear
  blend skinning.

Either way the result for a time sample is a :class:`MeshState`, which every
algorithm and renderer treats like a static mesh.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadPose, TimeOutOfRange, UnknownAnimation
from .mesh import Surface, normalize_rows
from .splines import catmull_rom_weights

SLERP_LERP_THRESHOLD = 0.9995


# -- quaternions (w, x, y, z) -------------------------------------------------

def quat_normalize(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q)


def quat_mul(a, b) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conj(q) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]], dtype=float)


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    s = math.sin(angle / 2)
    return np.array([math.cos(angle / 2), *(s * axis)])


def slerp(q0, q1, u: float) -> np.ndarray:
    """Shortest-arc spherical interpolation; normalized lerp when nearly parallel."""
    q0 = np.asarray(q0, dtype=float)
    q1 = np.asarray(q1, dtype=float)
    d = float(np.dot(q0, q1))
    if d < 0.0:
        q1, d = -q1, -d
    if d > SLERP_LERP_THRESHOLD:
        return quat_normalize(q0 + u * (q1 - q0))
    theta = math.acos(min(d, 1.0))
    s = math.sin(theta)
    return (math.sin((1 - u) * theta) * q0 + math.sin(u * theta) * q1) / s


@dataclass(frozen=True)
class Transform:
    """Rigid transform: rotate by ``rotation`` then translate."""

    rotation: tuple = (1.0, 0.0, 0.0, 0.0)
    translation: tuple = (0.0, 0.0, 0.0)

    @classmethod
    def identity(cls) -> "Transform":
        return cls()

    @classmethod
    def from_translation(cls, t) -> "Transform":
        return cls(translation=tuple(float(x) for x in t))

    def compose(self, other: "Transform") -> "Transform":
        """``self ∘ other``: apply ``other`` first."""
        r = quat_mul(self.rotation, other.rotation)
        t = quat_to_matrix(self.rotation) @ np.asarray(other.translation) + np.asarray(self.translation)
        return Transform(tuple(r), tuple(t))

    def inverse(self) -> "Transform":
        qi = quat_conj(self.rotation)
        t = -(quat_to_matrix(qi) @ np.asarray(self.translation))
        return Transform(tuple(qi), tuple(t))

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = quat_to_matrix(self.rotation)
        m[:3, 3] = self.translation
        return m

    def apply(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return p @ quat_to_matrix(self.rotation).T + np.asarray(self.translation)


# -- surfaces -----------------------------------------------------------------

@dataclass
class MeshState:
    """Snapshot of a surface at one time: deformed positions and normals."""

    surface: Surface
    positions: np.ndarray
    normals: np.ndarray
    time: float | None = None

    @classmethod
    def from_surface(cls, surface: Surface, time=None) -> "MeshState":
        return cls(surface, surface.positions, surface.normals, time)

    @property
    def faces(self) -> np.ndarray:
        return self.surface.faces

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    def to_surface(self) -> Surface:
        """Standalone :class:`Surface` sharing connectivity, for intrusive algorithms."""
        return self.surface.with_geometry(self.positions, self.normals)


def as_state(obj) -> MeshState:
    if isinstance(obj, MeshState):
        return obj
    if isinstance(obj, Surface):
        return MeshState.from_surface(obj)
    raise TypeError(f"expected Surface or MeshState, got {type(obj).__name__}")


@dataclass
class VertexAnimatedSurface:
    """Keyframed surface.  ``animations`` maps a name to an inclusive
    ``(first, last)`` keyframe range."""

    surface: Surface
    positions: np.ndarray  # (n_keyframes, V, 3)
    normals: np.ndarray  # (n_keyframes, V, 3)
    animations: dict[str, tuple[int, int]] = field(default_factory=dict)
    interpolation: str = "linear"
    frame_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.normals = np.asarray(self.normals, dtype=float)
        nv = self.surface.n_vertices
        if self.positions.ndim != 3 or self.positions.shape[1:] != (nv, 3):
            raise ValueError("every keyframe must have one position per base vertex")
        if self.normals.shape != self.positions.shape:
            raise ValueError("keyframe normals must match keyframe positions")
        if not self.animations:
            self.animations = {"default": (0, len(self.positions) - 1)}
        for name, (a, b) in self.animations.items():
            if not 0 <= a <= b < len(self.positions):
                raise ValueError(f"animation {name!r} range ({a}, {b}) out of bounds")
        if self.interpolation not in ("linear", "catmull-rom"):
            raise ValueError(f"unknown interpolation mode {self.interpolation!r}")

    @property
    def n_keyframes(self) -> int:
        return len(self.positions)

    def frame_count(self, animation: str) -> int:
        a, b = self._range(animation)
        return b - a + 1

    def _range(self, animation):
        try:
            return self.animations[animation]
        except KeyError:
            raise UnknownAnimation(f"no animation named {animation!r}") from None


def interpolate_keyframes(surface: VertexAnimatedSurface, animation: str, t: float, mode: str | None = None) -> MeshState:
    """Deform to keyframe time ``t`` (frame units, ``0 <= t <= n_frames - 1``)."""
    first, last = surface._range(animation)
    n = last - first + 1
    if not 0.0 <= t <= n - 1:
        raise TimeOutOfRange(f"t={t} outside [0, {n - 1}] for animation {animation!r}")
    mode = mode or surface.interpolation
    i = min(int(math.floor(t)), n - 1)
    u = t - i
    P, N = surface.positions, surface.normals

    def key(k):
        return first + min(max(k, 0), n - 1)

    if u == 0.0:
        pos = P[key(i)].copy()
        nrm = N[key(i)].copy()
    elif mode == "linear":
        pos = (1 - u) * P[key(i)] + u * P[key(i + 1)]
        nrm = (1 - u) * N[key(i)] + u * N[key(i + 1)]
    elif mode == "catmull-rom":
        w = catmull_rom_weights(u)
        ks = [key(i - 1), key(i), key(i + 1), key(i + 2)]
        pos = sum(w[j] * P[k] for j, k in enumerate(ks))
        nrm = sum(w[j] * N[k] for j, k in enumerate(ks))
    else:
        raise ValueError(f"unknown interpolation mode {mode!r}")

    length = np.linalg.norm(nrm, axis=1)
    bad = length == 0
    if bad.any():
        nrm[bad] = N[key(i)][bad]
        length[bad] = np.linalg.norm(nrm[bad], axis=1)
    nrm = nrm / length[:, None]
    return MeshState(surface.surface, pos, nrm, float(t))


@dataclass(frozen=True)
class Bone:
    name: str
    parent: int | None
    bind: Transform  # local bind transform relative to the parent


@dataclass
class Skeleton:
    bones: list[Bone]

    def __post_init__(self):
        for i, b in enumerate(self.bones):
            if b.parent is not None and not 0 <= b.parent < i:
                raise ValueError(f"bone {i} ({b.name!r}) must come after its parent")

    def __len__(self):
        return len(self.bones)

    def index(self, name: str) -> int:
        for i, b in enumerate(self.bones):
            if b.name == name:
                return i
        raise KeyError(name)

    def globals_from_locals(self, locals_: list[Transform]) -> list[Transform]:
        out: list[Transform] = []
        for b, loc in zip(self.bones, locals_):
            out.append(loc if b.parent is None else out[b.parent].compose(loc))
        return out

    def bind_globals(self) -> list[Transform]:
        return self.globals_from_locals([b.bind for b in self.bones])


@dataclass
class Track:
    """Time-keyed local transform of one bone (times in seconds, ascending)."""

    times: np.ndarray
    rotations: np.ndarray  # (K, 4)
    translations: np.ndarray  # (K, 3)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.rotations = np.asarray(self.rotations, dtype=float).reshape(-1, 4)
        self.translations = np.asarray(self.translations, dtype=float).reshape(-1, 3)
        if not (len(self.times) == len(self.rotations) == len(self.translations)) or len(self.times) == 0:
            raise ValueError("track needs matching, non-empty key arrays")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("track key times must be strictly increasing")

    def sample(self, t: float) -> Transform:
        ts = self.times
        if t <= ts[0]:
            return Transform(tuple(self.rotations[0]), tuple(self.translations[0]))
        if t >= ts[-1]:
            return Transform(tuple(self.rotations[-1]), tuple(self.translations[-1]))
        k = int(np.searchsorted(ts, t, side="right")) - 1
        u = (t - ts[k]) / (ts[k + 1] - ts[k])
        q = slerp(self.rotations[k], self.rotations[k + 1], u)
        tr = (1 - u) * self.translations[k] + u * self.translations[k + 1]
        return Transform(tuple(q), tuple(tr))

    @property
    def duration(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])


@dataclass
class SkinnedSurface:
    """Bind-pose surface plus skeleton, per-vertex bone weights and tracks.

    ``weights`` is a dense ``(V, n_bones)`` matrix whose rows sum to one.
    ``animations`` maps an animation name to ``{bone index: Track}``.
    """

    surface: Surface
    skeleton: Skeleton
    weights: np.ndarray
    animations: dict[str, dict[int, Track]] = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.surface.n_vertices, len(self.skeleton)):
            raise ValueError("weights must be (n_vertices, n_bones)")
        if (self.weights < 0).any():
            raise ValueError("negative skinning weight")
        if not np.allclose(self.weights.sum(1), 1.0, atol=1e-6):
            raise ValueError("skinning weights must sum to 1 per vertex")

    def tracks(self, animation: str) -> dict[int, Track]:
        try:
            return self.animations[animation]
        except KeyError:
            raise UnknownAnimation(f"no animation named {animation!r}") from None

    def time_range(self, animation: str) -> tuple[float, float]:
        tracks = self.tracks(animation)
        if not tracks:
            return 0.0, 0.0
        return min(tr.times[0] for tr in tracks.values()), max(tr.times[-1] for tr in tracks.values())


def pose_skeleton(skeleton: Skeleton, tracks: dict[int, Track], t: float) -> list[Transform]:
    """Global bone transforms at time ``t``; bones without a track keep their bind local."""
    locals_ = [tracks[i].sample(t) if i in tracks else b.bind for i, b in enumerate(skeleton.bones)]
    return skeleton.globals_from_locals(locals_)


def skin_vertices(surface: SkinnedSurface, pose: list[Transform], time: float | None = None) -> MeshState:
    """Linear blend skinning: ``p' = sum_i w_i (G_i ∘ B_i^-1)(p)``."""
    nb = len(surface.skeleton)
    if len(pose) != nb:
        raise BadPose(f"pose has {len(pose)} transforms, skeleton has {nb} bones")
    binds = surface.skeleton.bind_globals()
    mats = np.stack([g.compose(b.inverse()).matrix() for g, b in zip(pose, binds)])  # (B, 4, 4)
    W = surface.weights
    blended = np.einsum("vb,bij->vij", W, mats)
    p = surface.surface.positions
    n = surface.surface.normals
    pos = np.einsum("vij,vj->vi", blended[:, :3, :3], p) + blended[:, :3, 3]
    # normals: blend of the per-bone rotations only
    nrm = np.einsum("vij,vj->vi", blended[:, :3, :3], n)
    return MeshState(surface.surface, pos, normalize_rows(nrm), time)


def deform(animated, animation: str, t: float) -> MeshState:
    """Deform either kind of animated surface at time ``t``."""
    if isinstance(animated, VertexAnimatedSurface):
        return interpolate_keyframes(animated, animation, t)
    if isinstance(animated, SkinnedSurface):
        pose = pose_skeleton(animated.skeleton, animated.tracks(animation), t)
        return skin_vertices(animated, pose, t)
    raise TypeError("input is not animated")

