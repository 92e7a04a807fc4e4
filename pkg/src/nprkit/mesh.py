"""Half-edge triangle mesh with per-element property tables.

Halfedges of interior faces are stored implicitly: halfedge ``3*f + k`` runs
from corner ``k`` to corner ``(k+1) % 3`` of face ``f``.  Boundary halfedges
(face ``-1``) are appended after the ``3*F`` interior ones.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import (
    DegenerateTriangle,
    DuplicateName,
    EmptyMesh,
    IndexOutOfRange,
    InvalidVertex,
    NonManifoldEdge,
    UnknownProperty,
)

BOUNDARY = -1

ELEMENT_KINDS = ("vertex", "edge", "face")


def _clamp01(c) -> tuple[float, float, float]:
    return tuple(float(min(max(x, 0.0), 1.0)) for x in c)


@dataclass
class Material:
    """Surface appearance.  Colors are linear RGB clamped to [0, 1]."""

    name: str = "default"
    ambient: tuple[float, float, float] = (0.1, 0.1, 0.1)
    diffuse: tuple[float, float, float] = (0.8, 0.8, 0.8)
    specular: tuple[float, float, float] = (0.3, 0.3, 0.3)
    shininess: float = 32.0
    diffuse_texture: str | None = None

    def __post_init__(self):
        self.ambient = _clamp01(self.ambient)
        self.diffuse = _clamp01(self.diffuse)
        self.specular = _clamp01(self.specular)
        self.shininess = max(float(self.shininess), 0.0)


class PropertyHandle:
    """Accessor for one named property table.

    Indexing is forwarded to the backing array, so ``h[v] = 1.5`` and
    ``h[v]`` work, as do fancy indices.
    """

    def __init__(self, store: "_PropertyStore", kind: str, name: str):
        self._store = store
        self.kind = kind
        self.name = name

    @property
    def data(self) -> np.ndarray:
        return self._store.array(self.kind, self.name)

    def __getitem__(self, idx):
        return self.data[idx]

    def __setitem__(self, idx, value):
        self.data[idx] = value

    def get(self, idx):
        return self.data[idx]

    def set(self, idx, value):
        self.data[idx] = value

    def __repr__(self):
        return f"PropertyHandle({self.kind!r}, {self.name!r})"


class _PropertyStore:
    def __init__(self, counts: dict[str, int]):
        self._counts = counts
        self._tables: dict[str, dict[str, np.ndarray]] = {k: {} for k in ELEMENT_KINDS}

    def _check_kind(self, kind):
        if kind not in self._tables:
            raise ValueError(f"unknown element kind {kind!r}; expected one of {ELEMENT_KINDS}")

    def add(self, kind, name, dtype=float, shape=()):
        self._check_kind(kind)
        if name in self._tables[kind]:
            raise DuplicateName(f"{kind} property {name!r} already exists")
        shape = (shape,) if isinstance(shape, int) else tuple(shape)
        arr = np.zeros((self._counts[kind],) + shape, dtype=dtype)
        self._tables[kind][name] = arr
        return arr

    def array(self, kind, name):
        self._check_kind(kind)
        try:
            return self._tables[kind][name]
        except KeyError:
            raise UnknownProperty(f"no {kind} property named {name!r}") from None

    def remove(self, kind, name):
        self.array(kind, name)
        del self._tables[kind][name]

    def has(self, kind, name):
        self._check_kind(kind)
        return name in self._tables[kind]

    def names(self, kind):
        self._check_kind(kind)
        return list(self._tables[kind])


class Surface:
    """Static triangle mesh in half-edge form.

    Build instances with :func:`build_mesh`; the constructor takes the
    already-validated connectivity arrays.
    """

    def __init__(
        self,
        positions: np.ndarray,
        he_origin: np.ndarray,
        he_opposite: np.ndarray,
        he_next: np.ndarray,
        he_face: np.ndarray,
        vertex_he: np.ndarray,
        normals: np.ndarray | None = None,
        material: Material | None = None,
    ):
        self.positions = positions
        self.he_origin = he_origin
        self.he_opposite = he_opposite
        self.he_next = he_next
        self.he_face = he_face
        self.vertex_he = vertex_he
        self.material = material if material is not None else Material()
        self.materials: dict[str, Material] = {self.material.name: self.material}
        self.curvature = None

        self._n_faces = nf = int(np.count_nonzero(he_face >= 0)) // 3
        self.face_he = np.arange(nf, dtype=np.int64) * 3
        self.faces = he_origin[: 3 * nf].reshape(nf, 3).copy()

        # one undirected edge per interior halfedge pair / boundary halfedge
        n_he = len(he_origin)
        he_edge = np.full(n_he, -1, dtype=np.int64)
        canonical = np.flatnonzero(np.arange(n_he) < he_opposite)
        he_edge[canonical] = np.arange(len(canonical))
        he_edge[he_opposite[canonical]] = he_edge[canonical]
        self.he_edge = he_edge
        self.edge_he = canonical
        self.edges = np.stack([he_origin[canonical], he_origin[he_opposite[canonical]]], axis=1)
        self.face_edges = he_edge[: 3 * nf].reshape(nf, 3)

        self._props = _PropertyStore(
            {"vertex": self.n_vertices, "edge": self.n_edges, "face": nf}
        )
        if normals is None:
            normals = compute_vertex_normals(positions, self.faces)
        self.normals = np.asarray(normals, dtype=float)
        self.bounding_sphere = compute_bounding_sphere(self)
        self.feature_size = compute_feature_size(self) if self.n_edges else 0.0

    # -- counts -----------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_faces(self) -> int:
        return self._n_faces

    @property
    def n_edges(self) -> int:
        return len(self.edge_he)

    @property
    def n_halfedges(self) -> int:
        return len(self.he_origin)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    # -- halfedge navigation ----------------------------------------------
    def destination(self, h):
        return self.he_origin[self.he_next[h]] if np.ndim(h) else int(self.he_origin[self.he_next[h]])

    def prev(self, h):
        return self.he_next[self.he_next[h]] if self.he_face[h] >= 0 else self._boundary_prev(h)

    def _boundary_prev(self, h):
        # boundary loops can be longer than 3
        g = h
        while self.he_next[g] != h:
            g = self.he_next[g]
        return g

    def is_boundary_vertex(self, v: int) -> bool:
        h = self.vertex_he[v]
        return h >= 0 and self.he_face[self.he_opposite[h]] == BOUNDARY

    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero(self.he_face[self.he_opposite[self.edge_he]] == BOUNDARY)

    def face_normals(self, positions: np.ndarray | None = None, unit=True) -> np.ndarray:
        p = self.positions if positions is None else positions
        tri = p[self.faces]
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        if unit:
            n = n / np.maximum(np.linalg.norm(n, axis=1, keepdims=True), 1e-300)
        return n

    def face_areas(self, positions: np.ndarray | None = None) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_normals(positions, unit=False), axis=1)

    def face_adjacency(self) -> list[list[int]]:
        """Faces sharing an edge with each face, in corner order."""
        opp_face = self.he_face[self.he_opposite[: 3 * self.n_faces]].reshape(-1, 3)
        return [[int(g) for g in row if g >= 0] for row in opp_face]

    # -- properties --------------------------------------------------------
    def add_property(self, kind: str, name: str, dtype=float, shape=()) -> PropertyHandle:
        self._props.add(kind, name, dtype, shape)
        return PropertyHandle(self._props, kind, name)

    def property(self, kind: str, name: str) -> PropertyHandle:
        self._props.array(kind, name)
        return PropertyHandle(self._props, kind, name)

    def has_property(self, kind: str, name: str) -> bool:
        return self._props.has(kind, name)

    def remove_property(self, kind: str, name: str) -> None:
        self._props.remove(kind, name)

    def property_names(self, kind: str) -> list[str]:
        return self._props.names(kind)

    # -- derived copies ----------------------------------------------------
    def with_geometry(self, positions, normals=None) -> "Surface":
        """Same connectivity and material, new vertex positions/normals.

        Property tables are not carried over.
        """
        positions = np.asarray(positions, dtype=float)
        if positions.shape != self.positions.shape:
            raise ValueError("position array does not match vertex count")
        return Surface(
            positions,
            self.he_origin,
            self.he_opposite,
            self.he_next,
            self.he_face,
            self.vertex_he,
            normals=normals,
            material=self.material,
        )

    def __repr__(self):
        return f"Surface(V={self.n_vertices}, E={self.n_edges}, F={self.n_faces})"


def compute_vertex_normals(positions: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Area-weighted vertex normals; isolated vertices get +z."""
    n = np.zeros_like(positions, dtype=float)
    if len(faces):
        tri = positions[faces]
        fn = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        for k in range(3):
            np.add.at(n, faces[:, k], fn)
    return normalize_rows(n)


def normalize_rows(n: np.ndarray, fallback=(0.0, 0.0, 1.0)) -> np.ndarray:
    n = np.array(n, dtype=float)
    length = np.linalg.norm(n, axis=1)
    ok = length > 0
    n[ok] /= length[ok, None]
    n[~ok] = fallback
    return n


def build_mesh(positions, triangles, normals=None, material: Material | None = None) -> Surface:
    """Build a half-edge :class:`Surface` from a triangle soup.

    Triangles must be consistently oriented (counterclockwise seen from
    outside).  A directed edge used twice means either a non-manifold edge or
    a flipped neighbour; both raise :class:`NonManifoldEdge`.
    """
    pos = np.asarray(positions, dtype=float).reshape(-1, 3)
    tris = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    nv, nf = len(pos), len(tris)

    if nf:
        if tris.min() < 0 or tris.max() >= nv:
            bad = int(np.flatnonzero((tris < 0).any(1) | (tris >= nv).any(1))[0])
            raise IndexOutOfRange(f"triangle {bad} references a vertex outside [0, {nv})")
        rep = (tris[:, 0] == tris[:, 1]) | (tris[:, 1] == tris[:, 2]) | (tris[:, 0] == tris[:, 2])
        if rep.any():
            raise DegenerateTriangle(f"triangle {int(np.flatnonzero(rep)[0])} repeats a vertex")

    origin = tris.reshape(-1)
    dest = np.roll(tris, -1, axis=1).reshape(-1)
    n_int = 3 * nf

    key = origin * nv + dest
    order = np.argsort(key, kind="stable")
    sk = key[order]
    dup = np.flatnonzero(sk[1:] == sk[:-1])
    if len(dup):
        h = order[dup[0] + 1]
        a, b = int(origin[h]), int(dest[h])
        raise NonManifoldEdge(
            f"directed edge ({a}, {b}) is used by more than one face "
            "(edge shared by >2 faces or inconsistent orientation)"
        )

    # twin lookup: (dest, origin) among interior halfedges
    rkey = dest * nv + origin
    pos_in = np.searchsorted(sk, rkey)
    pos_in = np.minimum(pos_in, max(n_int - 1, 0))
    found = (sk[pos_in] == rkey) if n_int else np.zeros(0, bool)
    opposite = np.full(n_int, -1, dtype=np.int64)
    opposite[found] = order[pos_in[found]]

    boundary = np.flatnonzero(~found)
    nb = len(boundary)
    he_origin = np.concatenate([origin, dest[boundary]])
    he_face = np.concatenate([np.repeat(np.arange(nf, dtype=np.int64), 3), np.full(nb, BOUNDARY)])
    he_next = np.empty(n_int + nb, dtype=np.int64)
    he_next[:n_int] = (np.arange(n_int) // 3) * 3 + (np.arange(n_int) % 3 + 1) % 3
    he_opposite = np.empty(n_int + nb, dtype=np.int64)
    he_opposite[:n_int] = opposite
    bidx = n_int + np.arange(nb)
    he_opposite[boundary] = bidx
    he_opposite[bidx] = boundary

    # boundary halfedge b runs dest(h) -> origin(h); its successor starts at origin(h)
    start_of = {}
    for b in bidx:
        start_of.setdefault(int(he_origin[b]), int(b))
    for b, h in zip(bidx, boundary):
        he_next[b] = start_of[int(origin[h])]

    # outgoing halfedge per vertex; for boundary vertices, the interior one
    # whose twin is a boundary halfedge, so one-ring fans start at the rim
    vertex_he = np.full(nv, -1, dtype=np.int64)
    if n_int:
        used, first = np.unique(origin, return_index=True)
        vertex_he[used] = first
        vertex_he[origin[boundary]] = boundary

    if normals is not None:
        normals = normalize_rows(np.asarray(normals, dtype=float).reshape(-1, 3))
    return Surface(pos, he_origin, he_opposite, he_next, he_face, vertex_he, normals, material)


def vertex_one_ring(surface: Surface, v: int) -> list[int]:
    """Neighbours of ``v`` in counterclockwise order.

    Interior vertices give a cyclic list; boundary vertices an open fan
    starting and ending on the boundary.
    """
    if not 0 <= v < surface.n_vertices:
        raise InvalidVertex(f"vertex {v} out of range")
    h0 = int(surface.vertex_he[v])
    if h0 < 0:
        return []
    nxt, opp, face, org = surface.he_next, surface.he_opposite, surface.he_face, surface.he_origin
    ring = []
    h = h0
    while True:
        ring.append(int(org[nxt[h]]))
        if face[h] == BOUNDARY:
            break
        h = int(opp[nxt[nxt[h]]])
        if h == h0 or len(ring) > surface.n_halfedges:
            break
    return ring


def vertex_faces(surface: Surface, v: int) -> list[int]:
    """Faces around ``v`` in the same order as :func:`vertex_one_ring`."""
    if not 0 <= v < surface.n_vertices:
        raise InvalidVertex(f"vertex {v} out of range")
    h0 = int(surface.vertex_he[v])
    out = []
    h = h0
    while h >= 0 and surface.he_face[h] != BOUNDARY:
        out.append(int(surface.he_face[h]))
        h = int(surface.he_opposite[surface.he_next[surface.he_next[h]]])
        if h == h0:
            break
    return out


def compute_bounding_sphere(surface: Surface) -> tuple[np.ndarray, float]:
    """Centroid pass, then a radius pass that grows to contain every vertex.

    The centroid lies in the convex hull, so the radius is at most twice
    the minimal enclosing radius.
    """
    p = surface.positions
    if len(p) == 0:
        raise EmptyMesh("bounding sphere of an empty mesh")
    center = p.mean(axis=0)
    radius = float(np.sqrt(((p - center) ** 2).sum(axis=1)).max())
    return center, radius


def compute_feature_size(surface: Surface) -> float:
    """Mean edge length."""
    if surface.n_edges == 0:
        raise EmptyMesh("feature size needs at least one edge")
    p = surface.positions
    e = surface.edges
    return float(np.linalg.norm(p[e[:, 1]] - p[e[:, 0]], axis=1).mean())


def property_table(surface: Surface, kind: str, name: str, dtype: Any = float, shape=()) -> PropertyHandle:
    return surface.add_property(kind, name, dtype, shape)
