"""Per-vertex principal curvatures and curvature derivatives.

Each face fits a second fundamental form to the change of vertex normals
along its three edges (least squares in a face tangent frame).  Face tensors
are rotated into each corner's vertex frame and averaged with Voronoi corner
area weights.  The derivative tensor is fitted the same way from differences
of the per-vertex curvature tensors.

Tensors live in orthonormal tangent frames ``(u, v)``: the second form is
stored as ``(e, f, g)`` for ``[[e, f], [f, g]]`` and the derivative tensor as
``(a, b, c, d)`` where ``dII/du = [[a, b], [b, c]]`` and
``dII/dv = [[b, c], [c, d]]``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import MissingCurvature
from .mesh import Surface

CONDITION_LIMIT = 1e8
ANTIPARALLEL_DOT = -0.999999
UMBILIC_EPS = 1e-12


@dataclass
class SecondForm2x2:
    e: float
    f: float
    g: float

    def matrix(self) -> np.ndarray:
        return np.array([[self.e, self.f], [self.f, self.g]])


@dataclass
class CurvatureField:
    """Principal curvatures (``k1 >= k2``), directions and derivative tensor.

    ``tensor`` holds the accumulated vertex second forms in the frames
    ``frame_u``/``frame_v``; ``dcurv`` is expressed in the ``(e1, e2)`` frame
    and is ``None`` until :func:`estimate_curvature_derivative` runs.
    """

    k1: np.ndarray
    k2: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    normals: np.ndarray
    tensor: np.ndarray
    frame_u: np.ndarray
    frame_v: np.ndarray
    dcurv: np.ndarray | None = None
    time: float | None = None

    @property
    def gaussian(self) -> np.ndarray:
        return self.k1 * self.k2

    @property
    def mean(self) -> np.ndarray:
        return 0.5 * (self.k1 + self.k2)

    def attach(self, surface: Surface) -> None:
        """Store the field in the surface's vertex property tables."""
        items = {"k1": self.k1, "k2": self.k2, "e1": self.e1, "e2": self.e2}
        if self.dcurv is not None:
            items["dcurv"] = self.dcurv
        for name, arr in items.items():
            if surface.has_property("vertex", name):
                surface.remove_property("vertex", name)
            h = surface.add_property("vertex", name, float, arr.shape[1:])
            h[:] = arr
        surface.curvature = self


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def _unit(a):
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def rotate_frame(u, v, new_normal):
    """Minimal rotation carrying the plane of ``(u, v)`` onto ``new_normal``.

    Works on stacks of frames.  When the normals are (nearly) antiparallel the
    frame is flipped by a half turn around an in-plane axis: the coordinate
    axis least aligned with the old normal, projected into the plane.
    """
    u = np.array(u, dtype=float)
    v = np.array(v, dtype=float)
    old_n = np.cross(u, v)
    ndot = _dot(old_n, new_normal)
    flip = ndot < ANTIPARALLEL_DOT
    ok = ~flip
    if ok.any():
        nd = ndot[ok][..., None]
        perp_old = new_normal[ok] - nd * old_n[ok]
        dperp = (old_n[ok] + new_normal[ok]) / (1.0 + nd)
        u[ok] -= dperp * _dot(u[ok], perp_old)[..., None]
        v[ok] -= dperp * _dot(v[ok], perp_old)[..., None]
    if flip.any():
        on = old_n[flip]
        k = np.argmin(np.abs(on), axis=-1)
        axis = np.eye(3)[k]
        axis = _unit(axis - _dot(axis, on)[..., None] * on)
        for arr in (u, v):
            a = arr[flip]
            arr[flip] = 2 * _dot(a, axis)[..., None] * axis - a
    return u, v


def project_second_form(old_u, old_v, form, new_u, new_v):
    """Re-express stacked second forms ``(e, f, g)`` from one frame in another."""
    ru, rv = rotate_frame(new_u, new_v, np.cross(old_u, old_v))
    u1, v1 = _dot(ru, old_u), _dot(ru, old_v)
    u2, v2 = _dot(rv, old_u), _dot(rv, old_v)
    e, f, g = form[..., 0], form[..., 1], form[..., 2]
    return np.stack(
        [
            e * u1 * u1 + f * 2 * u1 * v1 + g * v1 * v1,
            e * u1 * u2 + f * (u1 * v2 + u2 * v1) + g * v1 * v2,
            e * u2 * u2 + f * 2 * u2 * v2 + g * v2 * v2,
        ],
        axis=-1,
    )


def project_derivative(old_u, old_v, dc, new_u, new_v):
    """Re-express stacked derivative tensors ``(a, b, c, d)`` in a new frame."""
    ru, rv = rotate_frame(new_u, new_v, np.cross(old_u, old_v))
    u1, v1 = _dot(ru, old_u), _dot(ru, old_v)
    u2, v2 = _dot(rv, old_u), _dot(rv, old_v)
    a, b, c, d = dc[..., 0], dc[..., 1], dc[..., 2], dc[..., 3]
    return np.stack(
        [
            a * u1 ** 3 + b * 3 * u1 * u1 * v1 + c * 3 * u1 * v1 * v1 + d * v1 ** 3,
            a * u1 * u1 * u2 + b * (u1 * u1 * v2 + 2 * u2 * u1 * v1)
            + c * (u2 * v1 * v1 + 2 * u1 * v1 * v2) + d * v1 * v1 * v2,
            a * u1 * u2 * u2 + b * (u2 * u2 * v1 + 2 * u1 * u2 * v2)
            + c * (u1 * v2 * v2 + 2 * u2 * v2 * v1) + d * v1 * v2 * v2,
            a * u2 ** 3 + b * 3 * u2 * u2 * v2 + c * 3 * u2 * v2 * v2 + d * v2 ** 3,
        ],
        axis=-1,
    )


def _diagonalize(form, frame_u, frame_v):
    e, f, g = form[..., 0], form[..., 1], form[..., 2]
    mean = 0.5 * (e + g)
    half = np.hypot(0.5 * (e - g), f)
    k1 = mean + half
    k2 = mean - half
    theta = 0.5 * np.arctan2(2 * f, e - g)
    theta = np.where(half < UMBILIC_EPS, 0.0, theta)
    c, s = np.cos(theta)[..., None], np.sin(theta)[..., None]
    e1 = c * frame_u + s * frame_v
    e2 = -s * frame_u + c * frame_v
    return k1, k2, e1, e2


def diagonalize_second_form(m: SecondForm2x2, frame) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Closed-form eigen-decomposition of a symmetric 2x2 form.

    ``frame`` is a pair of orthonormal 3D axes.  Returns ``(k1, k2, e1, e2)``
    with ``k1 >= k2`` and ``e1 x e2`` along the frame normal.  At umbilics
    ``e1`` is the first frame axis.
    """
    u, v = (np.asarray(a, dtype=float) for a in frame)
    k1, k2, e1, e2 = _diagonalize(np.array([m.e, m.f, m.g], dtype=float), u, v)
    return float(k1), float(k2), e1, e2


def corner_areas(positions: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Voronoi area of each face corner, with the obtuse-triangle fallback.

    Corner ``j`` of a face is opposite edge ``j``.  In an obtuse triangle each
    acute corner keeps the right triangle cut off by the perpendicular
    bisector of its edge to the obtuse corner; the obtuse corner gets the rest.
    """
    p = positions[faces]
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    area = 0.5 * np.linalg.norm(np.cross(e[:, 0], e[:, 1]), axis=1)
    l2 = (e * e).sum(-1)
    ew = np.stack(
        [
            l2[:, 0] * (l2[:, 1] + l2[:, 2] - l2[:, 0]),
            l2[:, 1] * (l2[:, 2] + l2[:, 0] - l2[:, 1]),
            l2[:, 2] * (l2[:, 0] + l2[:, 1] - l2[:, 2]),
        ],
        axis=1,
    )
    out = np.zeros((len(faces), 3))
    ob0 = ew[:, 0] <= 0
    ob1 = ~ob0 & (ew[:, 1] <= 0)
    ob2 = ~ob0 & ~ob1 & (ew[:, 2] <= 0)
    acute = ~(ob0 | ob1 | ob2)
    with np.errstate(divide="ignore", invalid="ignore"):
        for j, mask in ((0, ob0), (1, ob1), (2, ob2)):
            if not mask.any():
                continue
            j1, j2 = (j + 1) % 3, (j + 2) % 3
            a = area[mask]
            cj1 = -0.25 * l2[mask, j2] * a / _dot(e[mask, j], e[mask, j2])
            cj2 = -0.25 * l2[mask, j1] * a / _dot(e[mask, j], e[mask, j1])
            out[mask, j1] = cj1
            out[mask, j2] = cj2
            out[mask, j] = a - cj1 - cj2
        s = 0.5 * area[acute] / ew[acute].sum(1)
        for j in range(3):
            out[acute, j] = s * (ew[acute, (j + 1) % 3] + ew[acute, (j + 2) % 3])
    return np.nan_to_num(out)


def _vertex_frames(surface: Surface, normals: np.ndarray):
    p = surface.positions
    vh = surface.vertex_he
    ref = np.zeros_like(p)
    has = vh >= 0
    ref[has] = p[surface.he_origin[surface.he_next[vh[has]]]] - p[has]
    u = np.cross(ref, normals)
    bad = np.linalg.norm(u, axis=1) < 1e-300
    if bad.any():
        nb = normals[bad]
        k = np.argmin(np.abs(nb), axis=1)
        u[bad] = np.cross(np.eye(3)[k], nb)
    u = _unit(u)
    v = np.cross(normals, u)
    return u, v


def _face_frames(p: np.ndarray, faces: np.ndarray):
    tri = p[faces]
    e = np.stack([tri[:, 2] - tri[:, 1], tri[:, 0] - tri[:, 2], tri[:, 1] - tri[:, 0]], axis=1)
    cr = np.cross(e[:, 0], e[:, 1])
    area2 = np.linalg.norm(cr, axis=1)
    elen = np.linalg.norm(e[:, 0], axis=1)
    degenerate = (area2 <= 1e-300) | (elen <= 1e-300)
    safe_area = np.where(degenerate, 1.0, area2)
    safe_len = np.where(degenerate, 1.0, elen)
    t = e[:, 0] / safe_len[:, None]
    n = cr / safe_area[:, None]
    b = np.cross(n, t)
    return e, t, b, degenerate


def _solve_faces(w, m, skip, what):
    """Batched SPD solves; ill-conditioned systems are flagged and skipped."""
    good = ~skip
    if good.any():
        cond = np.linalg.cond(w[good])
        bad_cond = ~(cond <= CONDITION_LIMIT)
        idx = np.flatnonzero(good)
        good[idx[bad_cond]] = False
        if bad_cond.any():
            warnings.warn(
                f"{int(bad_cond.sum())} ill-conditioned {what} systems skipped", stacklevel=3
            )
    x = np.zeros(m.shape)
    if good.any():
        x[good] = np.linalg.solve(w[good], m[good][..., None])[..., 0]
    return x, good


def estimate_curvature(surface: Surface, normals: np.ndarray | None = None) -> CurvatureField:
    """Per-vertex principal curvatures and directions.

    Positive curvature means the surface bends toward the normal's opposite
    side, so a sphere with outward normals has ``k1 = k2 = 1/r``.
    """
    p = surface.positions
    n = surface.normals if normals is None else np.asarray(normals, dtype=float)
    F = surface.faces
    nv = surface.n_vertices

    frame_u, frame_v = _vertex_frames(surface, n)
    e, t, b, degenerate = _face_frames(p, F)
    if degenerate.any():
        warnings.warn(f"{int(degenerate.sum())} zero-area faces skipped", stacklevel=2)

    w = np.zeros((len(F), 3, 3))
    m = np.zeros((len(F), 3))
    for j in range(3):
        u_ = _dot(e[:, j], t)
        v_ = _dot(e[:, j], b)
        w[:, 0, 0] += u_ * u_
        w[:, 0, 1] += u_ * v_
        w[:, 1, 1] += u_ * u_ + v_ * v_
        w[:, 1, 2] += u_ * v_
        w[:, 2, 2] += v_ * v_
        dn = n[F[:, (j + 2) % 3]] - n[F[:, (j + 1) % 3]]
        dnu = _dot(dn, t)
        dnv = _dot(dn, b)
        m[:, 0] += dnu * u_
        m[:, 1] += dnu * v_ + dnv * u_
        m[:, 2] += dnv * v_
    w[:, 1, 0] = w[:, 0, 1]
    w[:, 2, 1] = w[:, 1, 2]
    face_form, used = _solve_faces(w, m, degenerate, "curvature")

    ca = corner_areas(p, F)
    ca[~used] = 0.0
    point_area = np.zeros(nv)
    for j in range(3):
        np.add.at(point_area, F[:, j], ca[:, j])
    inv_pa = np.divide(1.0, point_area, out=np.zeros(nv), where=point_area > 0)

    tensor = np.zeros((nv, 3))
    for j in range(3):
        vj = F[:, j]
        proj = project_second_form(t, b, face_form, frame_u[vj], frame_v[vj])
        wt = (ca[:, j] * inv_pa[vj])[:, None]
        np.add.at(tensor, vj, wt * proj)

    k1, k2, e1, e2 = _diagonalize(tensor, frame_u, frame_v)
    return CurvatureField(k1, k2, e1, e2, n, tensor, frame_u, frame_v)


def estimate_curvature_derivative(surface: Surface, field: CurvatureField | None) -> CurvatureField:
    """Fit the curvature-derivative tensor and store it on ``field`` (in the e1/e2 frame)."""
    if field is None or field.k1 is None:
        raise MissingCurvature("run estimate_curvature first")
    p = surface.positions
    F = surface.faces
    nv = surface.n_vertices
    e1, e2 = field.e1, field.e2
    e, t, b, degenerate = _face_frames(p, F)

    zeros = np.zeros(len(F))
    fcurv = [
        project_second_form(
            e1[F[:, j]], e2[F[:, j]],
            np.stack([field.k1[F[:, j]], zeros, field.k2[F[:, j]]], -1),
            t, b,
        )
        for j in range(3)
    ]

    w = np.zeros((len(F), 4, 4))
    m = np.zeros((len(F), 4))
    for j in range(3):
        dfc = fcurv[(j + 2) % 3] - fcurv[(j + 1) % 3]
        u_ = _dot(e[:, j], t)
        v_ = _dot(e[:, j], b)
        w[:, 0, 0] += u_ * u_
        w[:, 0, 1] += u_ * v_
        w[:, 3, 3] += v_ * v_
        w[:, 2, 3] += u_ * v_
        m[:, 0] += u_ * dfc[:, 0]
        m[:, 1] += v_ * dfc[:, 0] + 2 * u_ * dfc[:, 1]
        m[:, 2] += 2 * v_ * dfc[:, 1] + u_ * dfc[:, 2]
        m[:, 3] += v_ * dfc[:, 2]
    w[:, 1, 1] = 2 * w[:, 0, 0] + w[:, 3, 3]
    w[:, 1, 2] = 2 * w[:, 2, 3]
    w[:, 2, 2] = w[:, 0, 0] + 2 * w[:, 3, 3]
    w[:, 1, 0] = w[:, 0, 1]
    w[:, 2, 1] = w[:, 1, 2]
    w[:, 3, 2] = w[:, 2, 3]
    face_dc, used = _solve_faces(w, m, degenerate, "curvature-derivative")

    ca = corner_areas(p, F)
    ca[~used] = 0.0
    point_area = np.zeros(nv)
    for j in range(3):
        np.add.at(point_area, F[:, j], ca[:, j])
    inv_pa = np.divide(1.0, point_area, out=np.zeros(nv), where=point_area > 0)

    dcurv = np.zeros((nv, 4))
    for j in range(3):
        vj = F[:, j]
        proj = project_derivative(t, b, face_dc, e1[vj], e2[vj])
        wt = (ca[:, j] * inv_pa[vj])[:, None]
        np.add.at(dcurv, vj, wt * proj)
    field.dcurv = dcurv
    return field


def compute_curvature(surface: Surface, derivatives: bool = True, attach: bool = True) -> CurvatureField:
    """Curvature (and optionally its derivative) in one call."""
    field = estimate_curvature(surface)
    if derivatives:
        estimate_curvature_derivative(surface, field)
    if attach:
        field.attach(surface)
    return field
