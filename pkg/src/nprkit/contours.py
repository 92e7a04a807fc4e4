"""View-dependent line extraction as zero level sets of per-vertex fields.

A contour is defined by a scalar function evaluated at every vertex.  Edges
whose endpoints have opposite signs carry a crossing point; the two crossings
of each face form a segment, and segments are chained across shared edges
into polylines.  Silhouettes use ``n . (c - p)``; suggestive contours use the
radial curvature, trimmed by its directional derivative and by the viewing
angle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .animation import MeshState, as_state
from .curvature import CurvatureField
from .errors import FieldLengthMismatch, MissingAttributes, MissingCurvature

DEFAULT_DERIVATIVE_THRESHOLD = 0.001
DEFAULT_ANGLE_THRESHOLD = math.degrees(math.acos(0.1))


@dataclass
class Polyline:
    points: np.ndarray
    attributes: dict[str, np.ndarray] = field(default_factory=dict)
    closed: bool = False
    edges: np.ndarray | None = None  # crossing edge id of each point

    def __len__(self):
        return len(self.points)


@dataclass
class ContourSet:
    polylines: list[Polyline]
    name: str = ""
    camera: object = None

    def __len__(self):
        return len(self.polylines)

    def __iter__(self):
        return iter(self.polylines)

    def to_dict(self) -> dict:
        """JSON-ready dump: points plus per-point attributes."""
        return {
            "name": self.name,
            "polylines": [
                {
                    "closed": pl.closed,
                    "points": pl.points.tolist(),
                    "attributes": {k: v.tolist() for k, v in sorted(pl.attributes.items())},
                }
                for pl in self.polylines
            ],
        }


@dataclass
class ContourDefinition:
    """A named per-vertex field plus an optional post-extraction point filter."""

    name: str
    function: Callable[..., np.ndarray]
    point_filter: Callable[[ContourSet], ContourSet] | None = None


# -- view vectors --------------------------------------------------------------

def _view_vectors(positions, camera):
    """Unnormalized vector from each point toward the viewer."""
    if camera.orthographic:
        return np.broadcast_to(camera.toward_viewer, positions.shape)
    return np.asarray(camera.eye, dtype=float) - positions


def _unit_view(positions, camera):
    v = _view_vectors(positions, camera)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


# -- fields -----------------------------------------------------------------------

def silhouette_field(state, camera) -> np.ndarray:
    """``n . (c - p)`` (perspective) or ``n . d`` with ``d`` toward the viewer (orthographic)."""
    st = as_state(state)
    return np.einsum("ij,ij->i", st.normals, _view_vectors(st.positions, camera))


def ndotv(state, camera) -> np.ndarray:
    st = as_state(state)
    return np.einsum("ij,ij->i", st.normals, _unit_view(st.positions, camera))


def _require_curvature(curvature):
    if curvature is None or curvature.k1 is None:
        raise MissingCurvature("radial curvature needs a CurvatureField")


def radial_curvature_field(state, curvature: CurvatureField, camera) -> np.ndarray:
    """Normal curvature in the direction of the view vector projected to the tangent plane.

    Where the projection vanishes (viewer straight along the normal) the
    maximal curvature ``k1`` is used.
    """
    _require_curvature(curvature)
    st = as_state(state)
    w = _view_vectors(st.positions, camera)
    u = np.einsum("ij,ij->i", w, curvature.e1)
    v = np.einsum("ij,ij->i", w, curvature.e2)
    w2 = u * u + v * v
    scale = 1.0 if camera.orthographic else st.surface.feature_size
    tiny = np.sqrt(w2) < 1e-9 * scale
    kr = np.divide(
        curvature.k1 * u * u + curvature.k2 * v * v, w2, out=curvature.k1.astype(float).copy(), where=~tiny
    )
    return kr


def radial_curvature_derivative(state, curvature: CurvatureField, camera) -> tuple[np.ndarray, np.ndarray]:
    """Directional derivative of radial curvature along the projected view direction.

    With unit view vector ``v``, ``u = v.e1``, ``w = v.e2``, ``s^2 = u^2 + w^2``
    (``s = sin theta``) and unit tangent direction ``(u, w) / s``::

        Dw kr = C(w, w, w) + 2 K cot(theta)
        C(w, w, w) = (a u^3 + 3 b u^2 w + 3 c u w^2 + d w^3) / s^3
        cot(theta) = (n . v) / s

    where ``(a, b, c, d)`` are the derivative-tensor coefficients in the
    ``(e1, e2)`` frame (``dII/de1 = [[a, b], [b, c]]``, ``dII/de2 = [[b, c], [c, d]]``)
    and ``K = k1 k2``.  Returns ``(Dw kr, s)``; vertices with ``s`` ~ 0 get 0.
    """
    _require_curvature(curvature)
    if curvature.dcurv is None:
        raise MissingCurvature("curvature derivative tensor not estimated")
    st = as_state(state)
    vhat = _unit_view(st.positions, camera)
    u = np.einsum("ij,ij->i", vhat, curvature.e1)
    w = np.einsum("ij,ij->i", vhat, curvature.e2)
    s = np.sqrt(u * u + w * w)
    nv = np.einsum("ij,ij->i", vhat, st.normals)
    a, b, c, d = curvature.dcurv.T
    cubic = a * u ** 3 + 3 * b * u * u * w + 3 * c * u * w * w + d * w ** 3
    ok = s > 1e-9
    dwkr = np.zeros_like(s)
    dwkr[ok] = cubic[ok] / s[ok] ** 3 + 2 * curvature.k1[ok] * curvature.k2[ok] * nv[ok] / s[ok]
    return dwkr, s


# -- extraction ----------------------------------------------------------------------

def crossing_edges(surface, field: np.ndarray) -> np.ndarray:
    """Ids of edges whose endpoint values straddle zero (zeros count as positive)."""
    pos = field >= 0
    e = surface.edges
    return np.flatnonzero(pos[e[:, 0]] != pos[e[:, 1]])


def extract_isocurves(
    state,
    field,
    attributes: dict[str, np.ndarray] | None = None,
    name: str = "",
    camera=None,
) -> ContourSet:
    """Zero level set of a per-vertex scalar field as polylines.

    Exact zeros are treated as ``+epsilon``.  Per-vertex ``attributes`` are
    interpolated to the crossing points with the same edge parameter.  The
    positive side of the field lies to the left of each polyline's direction
    of travel, seen from the side the face normals point to.
    """
    st = as_state(state)
    surf = st.surface
    f = np.asarray(field, dtype=float)
    if f.shape != (st.n_vertices,):
        raise FieldLengthMismatch(f"field has {f.size} values for {st.n_vertices} vertices")
    attributes = attributes or {}

    pos = f >= 0
    E = surf.edges
    ce = np.flatnonzero(pos[E[:, 0]] != pos[E[:, 1]])
    if len(ce) == 0:
        return ContourSet([], name, camera)

    a, b = E[ce, 0], E[ce, 1]
    fa, fb = f[a], f[b]
    t = fa / (fa - fb)
    P = st.positions
    points = P[a] + t[:, None] * (P[b] - P[a])
    attr_vals = {
        k: np.asarray(v, dtype=float)[a] + (t.reshape((-1,) + (1,) * (np.ndim(v) - 1)))
        * (np.asarray(v, dtype=float)[b] - np.asarray(v, dtype=float)[a])
        for k, v in attributes.items()
    }
    slot = np.full(surf.n_edges, -1, dtype=np.int64)
    slot[ce] = np.arange(len(ce))

    # per face: segment from the (+ -> -) halfedge's crossing to the (- -> +) one
    F = surf.faces
    s = pos[F]
    s_next = np.roll(s, -1, axis=1)
    out_mask = s & ~s_next
    in_mask = ~s & s_next
    has = out_mask.any(1)
    fidx = np.flatnonzero(has)
    start_edge = surf.face_edges[fidx, np.argmax(out_mask[fidx], axis=1)]
    end_edge = surf.face_edges[fidx, np.argmax(in_mask[fidx], axis=1)]

    succ = np.full(len(ce), -1, dtype=np.int64)
    pred = np.full(len(ce), -1, dtype=np.int64)
    succ[slot[start_edge]] = slot[end_edge]
    pred[slot[end_edge]] = slot[start_edge]

    polylines = []
    visited = np.zeros(len(ce), dtype=bool)

    def walk(start):
        chain = [start]
        visited[start] = True
        k = succ[start]
        closed = False
        while k >= 0:
            if k == start:
                closed = True
                break
            chain.append(k)
            visited[k] = True
            k = succ[k]
        return chain, closed

    # open chains begin where nothing leads in (mesh boundary); order by edge id
    starts = np.flatnonzero(pred < 0)
    for k in starts[np.argsort(ce[starts], kind="stable")]:
        polylines.append(walk(int(k)))
    remaining = np.flatnonzero(~visited)
    for k in remaining[np.argsort(ce[remaining], kind="stable")]:
        if not visited[k]:
            polylines.append(walk(int(k)))

    out = []
    for chain, closed in polylines:
        idx = np.asarray(chain)
        pts = points[idx]
        # crossings that land on a shared zero vertex coincide; keep one
        keep = np.ones(len(idx), dtype=bool)
        if len(idx) > 1:
            keep[1:] = np.linalg.norm(np.diff(pts, axis=0), axis=1) > 1e-12
            if closed and np.linalg.norm(pts[-1] - pts[0]) <= 1e-12 and keep.sum() > 1:
                keep[len(idx) - 1 - np.argmax(keep[::-1])] = False
        idx = idx[keep]
        if len(idx) < 2:
            continue
        out.append(
            Polyline(
                points[idx],
                {k: v[idx] for k, v in attr_vals.items()},
                closed=bool(closed and len(idx) > 2),
                edges=ce[idx],
            )
        )
    return ContourSet(out, name, camera)


def trim_suggestive(
    contours: ContourSet,
    curvature: CurvatureField | None,
    camera,
    thresholds: tuple[float, float] = (DEFAULT_DERIVATIVE_THRESHOLD, DEFAULT_ANGLE_THRESHOLD),
    feature_size: float | None = None,
) -> ContourSet:
    """Drop unstable suggestive-contour points and split polylines around them.

    A point survives when ``Dw kr * feature_size^2 > t_d * s`` (``s`` = length
    of the projected unit view vector) and ``|n . v| > cos(theta_c)``.
    Fragments with fewer than two points are discarded.
    """
    t_d, theta_c = thresholds
    if t_d < 0:
        raise ValueError("derivative threshold must be >= 0")
    fs = feature_size
    if fs is None:
        fs = getattr(curvature, "feature_size", None) or 1.0
    cos_c = math.cos(math.radians(theta_c))
    out = []
    for pl in contours.polylines:
        for key in ("dwkr", "ndotv", "wlen"):
            if key not in pl.attributes:
                raise MissingAttributes(f"polyline lacks {key!r}; extract with suggestive attributes")
        keep = (pl.attributes["dwkr"] * fs * fs > t_d * pl.attributes["wlen"]) & (
            np.abs(pl.attributes["ndotv"]) > cos_c
        )
        out.extend(_split_runs(pl, keep))
    return ContourSet(out, contours.name, contours.camera)


def _split_runs(pl: Polyline, keep: np.ndarray) -> list[Polyline]:
    n = len(keep)
    if keep.all():
        return [pl]
    if not keep.any():
        return []
    order = np.arange(n)
    if pl.closed:
        # start just after a dropped point so a run can wrap around the seam
        first_drop = int(np.flatnonzero(~keep)[0])
        order = np.roll(order, -(first_drop + 1))
    runs, cur = [], []
    for i in order:
        if keep[i]:
            cur.append(i)
        else:
            if len(cur) >= 2:
                runs.append(cur)
            cur = []
    if len(cur) >= 2:
        runs.append(cur)
    return [
        Polyline(
            pl.points[r],
            {k: v[r] for k, v in pl.attributes.items()},
            closed=False,
            edges=None if pl.edges is None else pl.edges[r],
        )
        for r in (np.asarray(r) for r in runs)
    ]


# -- generators ------------------------------------------------------------------------

def extract_silhouettes(state, camera) -> ContourSet:
    st = as_state(state)
    g = silhouette_field(st, camera)
    attrs = {"ndotv": ndotv(st, camera), "normal": st.normals}
    cs = extract_isocurves(st, g, attrs, name="silhouette", camera=camera)
    return cs


def suggestive_attributes(state, curvature: CurvatureField, camera) -> dict[str, np.ndarray]:
    dwkr, s = radial_curvature_derivative(state, curvature, camera)
    return {"dwkr": dwkr, "wlen": s, "ndotv": ndotv(state, camera)}


def extract_suggestive(
    state,
    curvature: CurvatureField,
    camera,
    thresholds: tuple[float, float] = (DEFAULT_DERIVATIVE_THRESHOLD, DEFAULT_ANGLE_THRESHOLD),
    trim: bool = True,
) -> ContourSet:
    st = as_state(state)
    kr = radial_curvature_field(st, curvature, camera)
    attrs = suggestive_attributes(st, curvature, camera)
    cs = extract_isocurves(st, kr, attrs, name="suggestive", camera=camera)
    if not trim:
        return cs
    return trim_suggestive(cs, curvature, camera, thresholds, feature_size=st.surface.feature_size)


SILHOUETTE = ContourDefinition("silhouette", silhouette_field)
SUGGESTIVE = ContourDefinition("suggestive", radial_curvature_field, trim_suggestive)
