"""Z-buffered triangle rasterizer.

Triangles are clipped against the near plane in camera space, projected,
and snapped to a 1/256-pixel grid so that edge functions are evaluated in
exact integer arithmetic.  Coverage follows the top-left fill rule with
pixel centers at ``(x + 0.5, y + 0.5)``.  Visibility is resolved first
(face id and barycentrics per pixel); shading then runs once over the
written pixels.
"""
from __future__ import annotations

import numpy as np

from ..animation import as_state
from ..errors import DimensionMismatch
from .camera import Camera
from .framebuffer import Framebuffer

SUBPIXEL = 256


def snap(xy):
    """Screen coordinates to integer subpixel units (round half up)."""
    return np.floor(np.asarray(xy, dtype=float) * SUBPIXEL + 0.5).astype(np.int64)


def _is_top_left(dx, dy):
    # with positive signed area in y-down coordinates the triangle winds
    # clockwise on screen: top edges run right, left edges run up
    return (dy == 0) & (dx > 0) | (dy < 0)


def triangle_coverage(xy: np.ndarray, width: int, height: int):
    """Pixels covered by one screen triangle under the top-left rule.

    ``xy`` is ``(3, 2)`` in pixels.  Returns ``(px, py, bary, area2)``
    where ``bary`` are the barycentric weights of each pixel center and
    ``area2`` is twice the signed area (negative for triangles that wind
    counterclockwise as seen).  Zero-area triangles cover nothing.
    """
    s = snap(xy)
    x, y = s[:, 0], s[:, 1]
    area2 = int((x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]))
    empty = (np.empty(0, np.int64), np.empty(0, np.int64), np.empty((0, 3)), area2)
    if area2 == 0:
        return empty
    order = [0, 1, 2] if area2 > 0 else [0, 2, 1]
    x, y = x[order], y[order]

    x0 = max(int(np.floor(x.min() / SUBPIXEL)), 0)
    x1 = min(int(np.ceil(x.max() / SUBPIXEL)), width - 1)
    y0 = max(int(np.floor(y.min() / SUBPIXEL)), 0)
    y1 = min(int(np.ceil(y.max() / SUBPIXEL)), height - 1)
    if x0 > x1 or y0 > y1:
        return empty
    px, py = np.meshgrid(np.arange(x0, x1 + 1), np.arange(y0, y1 + 1))
    px, py = px.ravel(), py.ravel()
    cx = px * SUBPIXEL + SUBPIXEL // 2
    cy = py * SUBPIXEL + SUBPIXEL // 2

    inside = np.ones(len(px), dtype=bool)
    w = np.empty((3, len(px)), dtype=np.int64)
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3  # edge opposite vertex k
        dx, dy = x[j] - x[i], y[j] - y[i]
        w[k] = dx * (cy - y[i]) - dy * (cx - x[i])
        inside &= (w[k] > 0) | ((w[k] == 0) & _is_top_left(dx, dy))
    bary = (w[:, inside] / abs(area2)).T
    if area2 < 0:
        bary = bary[:, [0, 2, 1]]
    return px[inside], py[inside], bary, area2


def _clip_near(q, attrs, near):
    """Sutherland-Hodgman clip of one triangle against ``z >= near``."""
    out_q, out_a = [], []
    for k in range(3):
        j = (k + 1) % 3
        ak, aj = q[k, 2] >= near, q[j, 2] >= near
        if ak:
            out_q.append(q[k])
            out_a.append(attrs[k])
        if ak != aj:
            t = (near - q[k, 2]) / (q[j, 2] - q[k, 2])
            out_q.append(q[k] + t * (q[j] - q[k]))
            out_a.append(attrs[k] + t * (attrs[j] - attrs[k]))
    return np.array(out_q), np.array(out_a)


def _triangles_in_view(q, attrs, faces, camera):
    """Yield ``(face id, view-space corners (3,3), corner attributes (3,k))``."""
    zs = q[faces, 2]
    for f in range(len(faces)):
        z = zs[f]
        if (z < camera.near).all() or (z > camera.far).all():
            continue
        qi, ai = q[faces[f]], attrs[faces[f]]
        if (z >= camera.near).all():
            yield f, qi, ai
            continue
        cq, ca = _clip_near(qi, ai, camera.near)
        for k in range(1, len(cq) - 1):
            idx = [0, k, k + 1]
            yield f, cq[idx], ca[idx]


def rasterize_surface(
    state,
    camera: Camera,
    shader,
    target: Framebuffer,
    cull_backfaces: bool = True,
    wireframe: bool = False,
    wire_color=(0.0, 0.0, 0.0),
) -> Framebuffer:
    """Draw a surface into ``target`` with a less-than depth test.

    Position and normal are interpolated linearly in screen space;
    normals are renormalized per pixel before shading.  Triangles that wind
    clockwise as seen are culled when ``cull_backfaces`` is set.
    ``wireframe`` overdraws triangle edges in ``wire_color``.
    """
    if (target.width, target.height) != (camera.width, camera.height):
        raise DimensionMismatch(
            f"target {target.width}x{target.height} does not match viewport {camera.width}x{camera.height}"
        )
    st = as_state(state)
    P = np.asarray(st.positions, dtype=float)
    N = np.asarray(st.normals, dtype=float)
    faces = st.faces
    q = camera.view(P)
    attrs = np.hstack([P, N])

    H, W = target.height, target.width
    written = np.zeros((H, W), dtype=bool)
    pix_attr = np.zeros((H, W, 6))
    zbuf = target.depth

    for f, tq, ta in _triangles_in_view(q, attrs, faces, camera):
        xy, depth = camera.project_view(tq)
        px, py, bary, area2 = triangle_coverage(xy, W, H)
        if cull_backfaces and area2 >= 0:
            continue
        if len(px) == 0:
            continue
        d = bary @ depth
        ok = (d >= 0.0) & (d <= 1.0) & (d < zbuf[py, px])
        px, py, d, bary = px[ok], py[ok], d[ok], bary[ok]
        zbuf[py, px] = d
        written[py, px] = True
        pix_attr[py, px] = bary @ ta

    ys, xs = np.nonzero(written)
    if len(ys):
        pos = pix_attr[ys, xs, :3]
        nrm = pix_attr[ys, xs, 3:]
        nrm /= np.maximum(np.linalg.norm(nrm, axis=1, keepdims=True), 1e-300)
        if camera.orthographic:
            view = np.broadcast_to(camera.toward_viewer, pos.shape)
        else:
            view = np.asarray(camera.eye) - pos
            view = view / np.linalg.norm(view, axis=1, keepdims=True)
        rgb = shader.shade(pos, nrm, view, st.surface.material)
        target.color[ys, xs, :3] = rgb
        target.color[ys, xs, 3] = 1.0

    if wireframe:
        from .lines import draw_segments

        e = st.surface.edges
        draw_segments(target, camera, P[e[:, 0]], P[e[:, 1]], wire_color, width=1.0, depth_bias=1e-3)
    return target
