"""Lapped-texture patches: a face tangent field, field-aligned patch growth
and a least-squares local parameterization per patch.

Patches are boxes aligned with the field around a seed face.  Each is
flattened so that the u-gradient follows the field and the v-gradient its
in-plane perpendicular.  Overlapping patches are allowed and no blending
is performed.
"""
from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .errors import InvalidSeed, MissingCurvature, SingularSystem
from .mesh import Surface

log = logging.getLogger(__name__)

CONDITION_WARNING = 1e10


@dataclass
class TangentField:
    vectors: np.ndarray  # (F, 3) unit, in each face's plane

    def __len__(self):
        return len(self.vectors)


@dataclass
class Patch:
    seed: int
    faces: np.ndarray  # face ids, seed first, in growth order
    uv: np.ndarray  # (len(faces), 3, 2) per-corner texture coordinates

    def to_dict(self) -> dict:
        return {"seed": int(self.seed), "faces": self.faces.tolist(), "uv": self.uv.tolist()}


def _project_unit(vec, normals, fallback):
    v = vec - (vec * normals).sum(1, keepdims=True) * normals
    ln = np.linalg.norm(v, axis=1)
    bad = ln < 1e-12
    v[bad] = fallback[bad]
    ln[bad] = np.linalg.norm(v[bad], axis=1)
    return v / ln[:, None]


def _consistent_signs(surface: Surface, t: np.ndarray) -> np.ndarray:
    # e1 is a line field; flip faces in breadth-first order to agree with the face they were reached from
    t = t.copy()
    adj = surface.face_adjacency()
    seen = np.zeros(len(t), dtype=bool)
    for root in range(len(t)):
        if seen[root]:
            continue
        seen[root] = True
        q = deque([root])
        while q:
            f = q.popleft()
            for g in adj[f]:
                if not seen[g]:
                    seen[g] = True
                    if t[g] @ t[f] < 0:
                        t[g] = -t[g]
                    q.append(g)
    return t


def alignment(surface: Surface, field: TangentField) -> float:
    """Sum of ``dot(t_f, t_g)`` over edges shared by two faces."""
    h = surface.edge_he
    f0 = surface.he_face[h]
    f1 = surface.he_face[surface.he_opposite[h]]
    ok = (f0 >= 0) & (f1 >= 0)
    t = field.vectors
    return float((t[f0[ok]] * t[f1[ok]]).sum())


def build_tangent_field(surface: Surface, curvature=None, iterations: int = 0) -> TangentField:
    """Per-face tangent field from the principal direction ``e1``.

    Vertex directions are sign-aligned to the face's first corner, averaged
    and projected into the face plane (the first edge direction stands in
    when the projection vanishes).  Face signs are then made consistent
    across neighbors, and ``iterations`` rounds of averaging each face
    with its edge neighbors follow, renormalizing and reprojecting each time.
    """
    curvature = curvature if curvature is not None else surface.curvature
    if curvature is None:
        raise MissingCurvature("a tangent field needs principal directions; compute curvature first")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    F = surface.faces
    n = surface.face_normals()
    P = surface.positions
    edge0 = P[F[:, 1]] - P[F[:, 0]]
    e1 = np.asarray(curvature.e1)[F]  # (F, 3, 3)
    sign = np.where((e1 * e1[:, :1]).sum(2) < 0, -1.0, 1.0)
    t = _project_unit((e1 * sign[:, :, None]).sum(1), n, edge0)
    t = _consistent_signs(surface, t)

    opp = surface.he_face[surface.he_opposite[: 3 * surface.n_faces]].reshape(-1, 3)
    has = opp >= 0
    nb = np.where(has, opp, 0)
    for _ in range(iterations):
        s = t + (t[nb] * has[:, :, None]).sum(1)
        t = _project_unit(s, n, t)
    return TangentField(t)


def _centroids(surface: Surface) -> np.ndarray:
    return surface.positions[surface.faces].mean(1)


def grow_patch(surface: Surface, field: TangentField, seed: int, radius: float) -> np.ndarray:
    """Faces reached breadth-first from ``seed`` whose centroid stays in the seed's field-aligned box.

    A face is admitted when its centroid offset ``d`` from the seed centroid
    satisfies ``|d . t| <= radius`` and ``|d . (n x t)| <= radius`` in the
    seed frame.  The seed comes first, then faces in discovery order.
    """
    if not (isinstance(seed, (int, np.integer)) and 0 <= seed < surface.n_faces):
        raise InvalidSeed(f"seed face {seed!r} out of range [0, {surface.n_faces})")
    if not radius > 0:
        raise ValueError("patch radius must be positive")
    seed = int(seed)
    c = _centroids(surface)
    t = field.vectors[seed]
    b = np.cross(surface.face_normals()[seed], t)
    d = c - c[seed]
    inside = (np.abs(d @ t) <= radius) & (np.abs(d @ b) <= radius)
    adj = surface.face_adjacency()
    seen = {seed}
    order = [seed]
    q = deque([seed])
    while q:
        f = q.popleft()
        for g in adj[f]:
            if g not in seen and inside[g]:
                seen.add(g)
                order.append(g)
                q.append(g)
    return np.asarray(order, dtype=np.int64)


def _connected(surface: Surface, faces: np.ndarray) -> bool:
    members = set(faces.tolist())
    adj = surface.face_adjacency()
    stack, seen = [int(faces[0])], {int(faces[0])}
    while stack:
        f = stack.pop()
        for g in adj[f]:
            if g in members and g not in seen:
                seen.add(g)
                stack.append(g)
    return len(seen) == len(members)


def parameterize_patch(surface: Surface, faces, field: TangentField) -> Patch:
    """Least-squares flattening of a connected face set.

    Minimizes ``sum_f area_f (|grad u - t_f|^2 + |grad v - n_f x t_f|^2)``
    over piecewise-linear ``u, v``.  The first face is the seed: its first
    corner is pinned to ``(0, 0)`` and its second to the seed edge expressed
    in the seed's field frame.  The reduced normal equations are solved by
    Cholesky factorization.
    """
    faces = np.asarray(faces, dtype=np.int64).ravel()
    if len(faces) == 0:
        raise SingularSystem("empty patch")
    if not _connected(surface, faces):
        raise SingularSystem("patch faces are not edge-connected")
    P = surface.positions
    tri = surface.faces[faces]
    verts, local = np.unique(tri, return_inverse=True)
    local = local.reshape(-1, 3)
    nv = len(verts)

    cr = surface.face_normals(unit=False)[faces]
    area2 = np.linalg.norm(cr, axis=1)
    if (area2 <= 1e-300).any():
        raise SingularSystem("patch contains a degenerate face")
    n = cr / area2[:, None]
    t = field.vectors[faces]
    b = np.cross(n, t)

    # gradient of the hat function at corner k: n x (edge opposite k) / (2 area)
    x = P[tri]
    grads = np.stack([np.cross(n, x[:, (k + 2) % 3] - x[:, (k + 1) % 3]) for k in range(3)], axis=1)
    grads /= area2[:, None, None]
    w = np.sqrt(0.5 * area2)
    rows = (np.arange(len(faces))[:, None, None] * 3 + np.arange(3)[None, None, :]).repeat(3, axis=1)
    cols = np.broadcast_to(local[:, :, None], rows.shape)
    G = scipy.sparse.csr_matrix(
        ((grads * w[:, None, None]).ravel(), (rows.ravel(), cols.ravel())), shape=(3 * len(faces), nv)
    )
    rhs = np.stack([(t * w[:, None]).ravel(), (b * w[:, None]).ravel()], axis=1)

    s0, s1 = local[0, 0], local[0, 1]
    edge = x[0, 1] - x[0, 0]
    pinned = np.zeros((nv, 2))
    pinned[s1] = (edge @ t[0], edge @ b[0])
    free = np.ones(nv, dtype=bool)
    free[[s0, s1]] = False

    uv = pinned.copy()
    if free.any():
        Gf = G[:, free]
        r = rhs - G[:, ~free] @ pinned[~free]
        A = (Gf.T @ Gf).toarray()
        try:
            c, low = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            raise SingularSystem("patch system is not positive definite") from None
        d = np.abs(np.diag(c))
        if d.min() <= 1e-12 * d.max():
            raise SingularSystem("patch system is numerically singular")
        cond = (d.max() / d.min()) ** 2
        if cond > CONDITION_WARNING:
            log.warning("patch seeded at face %d is ill-conditioned (estimate %.3g)", int(faces[0]), cond)
        uv[free] = scipy.linalg.cho_solve((c, low), Gf.T @ r, check_finite=False)
    return Patch(int(faces[0]), faces, uv[local])


def face_stretch(surface: Surface, patch: Patch) -> np.ndarray:
    """Singular values ``(F, 2)`` of each face's map from its plane to UV."""
    x = surface.positions[surface.faces[patch.faces]]
    e1 = x[:, 1] - x[:, 0]
    e2 = x[:, 2] - x[:, 0]
    a = e1 / np.linalg.norm(e1, axis=1, keepdims=True)
    nrm = np.cross(e1, e2)
    c = np.cross(nrm / np.linalg.norm(nrm, axis=1, keepdims=True), a)
    X = np.stack([np.stack([(e1 * a).sum(1), (e1 * c).sum(1)], 1), np.stack([(e2 * a).sum(1), (e2 * c).sum(1)], 1)], 2)
    U = np.stack([patch.uv[:, 1] - patch.uv[:, 0], patch.uv[:, 2] - patch.uv[:, 0]], 2)
    J = U @ np.linalg.inv(X)
    return np.linalg.svd(J, compute_uv=False)


def cover_surface(surface: Surface, field: TangentField, radius: float) -> list[Patch]:
    """Seed at the lowest uncovered face until every face lies in some patch."""
    covered = np.zeros(surface.n_faces, dtype=bool)
    patches = []
    while not covered.all():
        seed = int(np.argmin(covered))
        faces = grow_patch(surface, field, seed, radius)
        patches.append(parameterize_patch(surface, faces, field))
        covered[faces] = True
    return patches


def patches_to_json(patches: list[Patch]) -> str:
    return json.dumps({"patches": [p.to_dict() for p in patches]}, indent=1) + "\n"


def _patch_color(i: int) -> np.ndarray:
    # golden-ratio hue walk, fully saturated
    h = (i * 0.618033988749895) % 1.0
    k = (np.array([5.0, 3.0, 1.0]) + h * 6.0) % 6.0
    return 1.0 - np.clip(np.minimum(k, 4.0 - k), 0.0, 1.0) * 0.75


def uv_atlas(patches: list[Patch], cell: int = 64):
    """Debug image with one grid cell per patch, each patch drawn flat in its own color."""
    from .io.ppm import ImageBuffer
    from .render.raster import triangle_coverage

    cols = max(1, int(np.ceil(np.sqrt(len(patches)))))
    rows = max(1, int(np.ceil(len(patches) / cols)))
    img = np.ones((rows * cell, cols * cell, 3))
    for i, p in enumerate(patches):
        uv = p.uv.reshape(-1, 2)
        lo, hi = uv.min(0), uv.max(0)
        scale = (cell - 2) / max(float((hi - lo).max()), 1e-300)
        ox, oy = (i % cols) * cell + 1, (i // cols) * cell + 1
        color = _patch_color(i)
        for tri in p.uv:
            xy = (tri - lo) * scale
            xy[:, 1] = (cell - 2) - xy[:, 1]
            px, py, _, _ = triangle_coverage(xy, cell - 2, cell - 2)
            img[py + oy, px + ox] = color
    return ImageBuffer.from_float(img)
