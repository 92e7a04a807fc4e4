"""Procedural test meshes: platonic solids, icospheres, tori, grids, cylinders."""
from __future__ import annotations

import numpy as np

from .mesh import Surface, build_mesh


def tetrahedron() -> Surface:
    p = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    t = [[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]]
    return build_mesh(p, t)


def octahedron() -> Surface:
    p = np.array(
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float
    )
    t = [
        [0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
        [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5],
    ]
    return build_mesh(p, t)


def _icosahedron_arrays():
    phi = (1.0 + 5.0 ** 0.5) / 2.0
    p = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    p /= np.linalg.norm(p, axis=1, keepdims=True)
    t = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ]
    )
    return p, t


def icosahedron() -> Surface:
    return build_mesh(*_icosahedron_arrays())


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> Surface:
    """Geodesic sphere: each icosahedron face split into ``4**subdivisions``
    triangles on a uniform barycentric grid, then projected to the sphere.

    Vertex normals are the default area-weighted ones, not the radial directions.
    """
    p, t = _icosahedron_arrays()
    freq = 2 ** subdivisions
    ids: dict[tuple, int] = {}
    verts = []
    tris = []
    for a, b, c in t:
        corner = {}
        for i in range(freq + 1):
            for j in range(freq + 1 - i):
                k = freq - i - j
                # key on (global vertex, weight) pairs so shared edges weld
                key = tuple(sorted(x for x in ((a, i), (b, j), (c, k)) if x[1] > 0))
                if key not in ids:
                    ids[key] = len(verts)
                    verts.append((i * p[a] + j * p[b] + k * p[c]) / freq)
                corner[i, j] = ids[key]
        for i in range(freq):
            for j in range(freq - i):
                tris.append([corner[i, j], corner[i + 1, j], corner[i, j + 1]])
                if i + j + 1 < freq:
                    tris.append([corner[i + 1, j], corner[i + 1, j + 1], corner[i, j + 1]])
    verts = np.array(verts)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    return build_mesh(verts * radius, tris)


def torus(major: float = 1.0, minor: float = 0.35, n_major: int = 48, n_minor: int = 24) -> Surface:
    """Torus around the z axis (tube circle in the xz half-planes)."""
    u = 2 * np.pi * np.arange(n_major) / n_major
    v = 2 * np.pi * np.arange(n_minor) / n_minor
    U, V = np.meshgrid(u, v, indexing="ij")
    x = (major + minor * np.cos(V)) * np.cos(U)
    y = (major + minor * np.cos(V)) * np.sin(U)
    z = minor * np.sin(V)
    p = np.stack([x, y, z], -1).reshape(-1, 3)
    tris = []
    for i in range(n_major):
        for j in range(n_minor):
            a = i * n_minor + j
            b = ((i + 1) % n_major) * n_minor + j
            c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            d = i * n_minor + (j + 1) % n_minor
            tris += [[a, b, c], [a, c, d]]
    return build_mesh(p, tris)


def grid(nx: int = 10, ny: int = 10, size: float = 1.0, height=None) -> Surface:
    """Regular ``nx`` x ``ny`` cell grid on ``[-size/2, size/2]^2``.

    ``height`` is an optional callable ``z = height(x, y)``.  Cells are split
    alternately so the triangulation is symmetric under point reflection
    through the center.
    """
    xs = np.linspace(-size / 2, size / 2, nx + 1)
    ys = np.linspace(-size / 2, size / 2, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    Z = np.zeros_like(X) if height is None else height(X, Y)
    p = np.stack([X, Y, Z], -1).reshape(-1, 3)
    tris = []
    for i in range(nx):
        for j in range(ny):
            a = i * (ny + 1) + j
            b = (i + 1) * (ny + 1) + j
            c = (i + 1) * (ny + 1) + j + 1
            d = i * (ny + 1) + j + 1
            if (i + j) % 2 == 0:
                tris += [[a, b, c], [a, c, d]]
            else:
                tris += [[a, b, d], [b, c, d]]
    return build_mesh(p, tris)


def cylinder(radius: float = 0.5, height: float = 2.0, n_around: int = 64, n_along: int = 32) -> Surface:
    """Open cylinder (no caps) along z, centered at the origin."""
    th = 2 * np.pi * np.arange(n_around) / n_around
    zs = np.linspace(-height / 2, height / 2, n_along + 1)
    T, Z = np.meshgrid(th, zs, indexing="ij")
    p = np.stack([radius * np.cos(T), radius * np.sin(T), Z], -1).reshape(-1, 3)
    tris = []
    for i in range(n_around):
        for j in range(n_along):
            a = i * (n_along + 1) + j
            b = ((i + 1) % n_around) * (n_along + 1) + j
            c = ((i + 1) % n_around) * (n_along + 1) + j + 1
            d = i * (n_along + 1) + j + 1
            if (i + j) % 2 == 0:
                tris += [[a, b, c], [a, c, d]]
            else:
                tris += [[a, b, d], [b, c, d]]
    return build_mesh(p, tris)


def fan(n: int = 6, radius: float = 1.0) -> Surface:
    """``n`` triangles around an apex at the origin (vertex 0)."""
    th = 2 * np.pi * np.arange(n) / n
    rim = np.stack([radius * np.cos(th), radius * np.sin(th), np.zeros(n)], -1)
    p = np.vstack([[0.0, 0.0, 0.0], rim])
    tris = [[0, 1 + k, 1 + (k + 1) % n] for k in range(n)]
    return build_mesh(p, tris)


def cube(size: float = 1.0) -> Surface:
    """Cube with each side a separate quad, giving flat per-side normals."""
    h = size / 2
    sides = [
        ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        ((-1, 0, 0), (0, 0, 1), (0, 1, 0)),
        ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
        ((0, -1, 0), (1, 0, 0), (0, 0, 1)),
        ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
        ((0, 0, -1), (0, 1, 0), (1, 0, 0)),
    ]
    p, n, t = [], [], []
    for nrm, a, b in sides:
        nrm, a, b = map(np.asarray, (nrm, a, b))
        base = len(p)
        for sa, sb in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
            p.append(h * (nrm + sa * a + sb * b))
            n.append(nrm)
        t += [[base, base + 1, base + 2], [base, base + 2, base + 3]]
    return build_mesh(np.array(p, dtype=float), t, normals=np.array(n, dtype=float))


def sphere_cap(angle: float, radius: float = 1.0, rings: int = 6, segments: int = 24) -> Surface:
    """Polar cap of a sphere spanning polar angle ``angle`` (radians) around +z."""
    p = [[0.0, 0.0, radius]]
    for r in range(1, rings + 1):
        phi = angle * r / rings
        for s in range(segments):
            th = 2 * np.pi * s / segments
            p.append([radius * np.sin(phi) * np.cos(th), radius * np.sin(phi) * np.sin(th), radius * np.cos(phi)])
    p = np.array(p)
    tris = [[0, 1 + s, 1 + (s + 1) % segments] for s in range(segments)]
    for r in range(1, rings):
        o0, o1 = 1 + (r - 1) * segments, 1 + r * segments
        for s in range(segments):
            s1 = (s + 1) % segments
            tris += [[o0 + s, o1 + s, o1 + s1], [o0 + s, o1 + s1, o0 + s1]]
    return build_mesh(p, tris)
