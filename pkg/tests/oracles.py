"""Independent reference implementations used as test oracles.

None of these call into the code under test beyond plain data access.
"""
from __future__ import annotations

import struct
from fractions import Fraction

import numpy as np


# -- mesh ------------------------------------------------------------------------

def undirected_edges(faces) -> set[frozenset]:
    out = set()
    for a, b, c in np.asarray(faces).tolist():
        out |= {frozenset((a, b)), frozenset((b, c)), frozenset((c, a))}
    return out


def brute_crossing_edges(faces, f) -> set[frozenset]:
    """Edges whose end values have opposite signs, zeros counting as positive."""
    pos = np.asarray(f) >= 0
    return {e for e in undirected_edges(faces) if len({bool(pos[v]) for v in e}) == 2}


def brute_neighbors(faces, v) -> set[int]:
    out = set()
    for tri in np.asarray(faces).tolist():
        if v in tri:
            out |= set(tri) - {v}
    return out


# -- rasterization ------------------------------------------------------------------

def _snap(x) -> int:
    # round half up on a 1/256 grid, in exact arithmetic; result in 1/256 units
    s = Fraction(float(x)) * 256 + Fraction(1, 2)
    return s.numerator // s.denominator


def _edge_is_top_or_left(a, b, c) -> bool:
    """Screen space, y down: a top edge is horizontal with the interior below it;
    a left edge has the interior to its right."""
    if a[1] == b[1]:
        return c[1] > a[1]
    # sign of c.x - x_at(c.y) on the line through a and b, without division
    num = (c[0] - a[0]) * (b[1] - a[1]) - (c[1] - a[1]) * (b[0] - a[0])
    return (num > 0) == (b[1] > a[1])


def coverage_oracle(xy, width, height) -> tuple[set, dict]:
    """Pixels whose centers lie in the snapped triangle under the top-left rule.

    Every pixel of the viewport is tested with exact integer arithmetic in
    1/512-pixel units.  Returns the pixel set and the exact barycentric
    coordinates (as Fractions) per covered pixel.
    """
    v = [(2 * _snap(x), 2 * _snap(y)) for x, y in np.asarray(xy, dtype=float).tolist()]
    area = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1])
    if area == 0:
        return set(), {}
    edges = [(v[(k + 1) % 3], v[(k + 2) % 3], v[k]) for k in range(3)]
    inclusive = [_edge_is_top_or_left(a, b, c) for a, b, c in edges]
    sign = 1 if area > 0 else -1
    pixels, bary = set(), {}
    for py in range(height):
        cy = 512 * py + 256
        for px in range(width):
            cx = 512 * px + 256
            w = []
            for (a, b, _), inc in zip(edges, inclusive):
                e = sign * ((b[0] - a[0]) * (cy - a[1]) - (b[1] - a[1]) * (cx - a[0]))
                if e < 0 or (e == 0 and not inc):
                    break
                w.append(e)
            else:
                pixels.add((px, py))
                bary[(px, py)] = [Fraction(wi, abs(area)) for wi in w]
    return pixels, bary


# -- curvature ------------------------------------------------------------------------

def height_field_second_form(fx, fy, fxx, fxy, fyy):
    """Second fundamental form of ``z = f(x, y)`` in the (x, y) coordinate basis,
    for the upward normal and the convention that a sphere has positive curvature."""
    s = np.sqrt(1 + fx * fx + fy * fy)
    return -np.array([[fxx, fxy], [fxy, fyy]]) / s


def cubic_derivative_oracle(e1, e2, h=1e-4):
    """Derivative tensor of the second fundamental form of ``z = x^3`` at the origin,
    by central differences, contracted in the in-plane frame ``(e1, e2)``."""

    def II(x, y):
        return height_field_second_form(3 * x * x, 0.0, 6 * x, 0.0, 0.0)

    dII = [(II(h, 0) - II(-h, 0)) / (2 * h), (II(0, h) - II(0, -h)) / (2 * h)]
    u, v = np.asarray(e1[:2]), np.asarray(e2[:2])

    def C(a, b, c):
        return sum(a[i] * (b @ dII[i] @ c) for i in range(2))

    return np.array([C(u, u, u), C(u, u, v), C(u, v, v), C(v, v, v)])


# -- MD2 bytes ---------------------------------------------------------------------------

def md2_bytes(frames, tris, skins=(), st=(), magic=b"IDP2", version=8, tri_st=None) -> bytes:
    """MD2 file assembled field by field with ``struct``.

    ``frames``: list of ``(name, scale3, translate3, [(x, y, z, normal_index), ...])``;
    ``tris``: vertex index triples as stored in the file.
    """
    nv = len(frames[0][3])
    framesize = 40 + 4 * nv
    ofs_skins = 68
    ofs_st = ofs_skins + 64 * len(skins)
    ofs_tris = ofs_st + 4 * len(st)
    ofs_frames = ofs_tris + 12 * len(tris)
    ofs_glcmds = ofs_frames + framesize * len(frames)
    ofs_end = ofs_glcmds + 4
    out = bytearray(magic)
    out += struct.pack(
        "<16i", version, 8, 8, framesize, len(skins), nv, len(st), len(tris), 1, len(frames),
        ofs_skins, ofs_st, ofs_tris, ofs_frames, ofs_glcmds, ofs_end,
    )
    for s in skins:
        out += s.encode().ljust(64, b"\0")
    for s, t in st:
        out += struct.pack("<hh", s, t)
    tri_st = tri_st or [(0, 0, 0)] * len(tris)
    for (a, b, c), (sa, sb, sc) in zip(tris, tri_st):
        out += struct.pack("<6H", a, b, c, sa, sb, sc)
    for name, scale, translate, verts in frames:
        out += struct.pack("<3f", *scale) + struct.pack("<3f", *translate) + name.encode().ljust(16, b"\0")
        for x, y, z, n in verts:
            out += struct.pack("<4B", x, y, z, n)
    out += struct.pack("<i", 0)
    return bytes(out)


# Tetrahedron in file (clockwise-from-outside) winding, vertex bytes chosen by hand.
TETRA_BYTES = [(0, 0, 0), (20, 0, 0), (0, 20, 0), (0, 0, 20)]
TETRA_TRIS_CW = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]


def tetra_md2(second_frame_shift=5) -> bytes:
    """Two-frame tetrahedron: frame 1 moves vertex 3 up by ``second_frame_shift`` bytes."""
    f0 = [(x, y, z, 0) for x, y, z in TETRA_BYTES]
    f1 = [(x, y, z + (second_frame_shift if i == 3 else 0), 0) for i, (x, y, z) in enumerate(TETRA_BYTES)]
    return md2_bytes(
        [("wave1", (0.1, 0.1, 0.1), (-1.0, -1.0, -1.0), f0), ("wave2", (0.1, 0.1, 0.1), (-1.0, -1.0, -1.0), f1)],
        TETRA_TRIS_CW,
    )
