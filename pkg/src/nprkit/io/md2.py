"""Quake II MD2 (version 8) vertex-animated models.

Layout, all little-endian: a 68-byte header of 17 int32 fields, then lumps
at the header offsets.  Each frame stores a per-axis ``scale`` and
``translate`` (3 float32 each), a 16-byte name, and per vertex three
position bytes plus an index into the fixed normal table; positions
decompress as ``scale * byte + translate``.  Triangles are 3 vertex and 3
texture-coordinate indices (uint16).

MD2 triangles wind clockwise seen from outside; the loader swaps two
corners so faces are counterclockwise like every other surface.
"""
from __future__ import annotations

import os
import re
import struct
from dataclasses import dataclass

import numpy as np

from ..animation import VertexAnimatedSurface
from ..errors import BadMagic, ParseError, TruncatedFile, UnsupportedVersion
from ..mesh import build_mesh
from .md2_normals import MD2_NORMALS

MAGIC = b"IDP2"
VERSION = 8
HEADER = struct.Struct("<4s16i")
HEADER_FIELDS = (
    "version", "skinwidth", "skinheight", "framesize", "num_skins", "num_vertices", "num_st",
    "num_tris", "num_glcmds", "num_frames", "ofs_skins", "ofs_st", "ofs_tris", "ofs_frames",
    "ofs_glcmds", "ofs_end",
)
FRAME_HEADER = struct.Struct("<3f3f16s")


@dataclass
class MD2Extras:
    """Lumps not needed for connectivity, kept for callers that texture the model."""

    skins: list[str]
    st: np.ndarray  # (num_st, 2) int16 texel coordinates
    tri_st: np.ndarray  # (num_tris, 3) texcoord index per corner, in loaded winding
    glcmds: np.ndarray  # raw int32 command stream
    skin_size: tuple[int, int]


def animation_prefix(frame_name: str) -> str:
    """Frame name with trailing digits removed: ``"run12"`` -> ``"run"``."""
    return re.sub(r"\d+$", "", frame_name)


def group_frames(names: list[str]) -> dict[str, tuple[int, int]]:
    """Consecutive frames sharing a prefix form one animation ``(first, last)``.

    A prefix that reappears after another one starts a new animation named
    ``prefix.N`` (N = 1, 2, ...).
    """
    groups: dict[str, tuple[int, int]] = {}
    seen: dict[str, int] = {}
    cur, start = None, 0
    for i, name in enumerate(names + [None]):
        p = None if name is None else animation_prefix(name)
        if p != cur or name is None:
            if cur is not None:
                key = cur if seen.get(cur, 0) == 0 else f"{cur}.{seen[cur]}"
                seen[cur] = seen.get(cur, 0) + 1
                groups[key] = (start, i - 1)
            cur, start = p, i
    return groups


def _need(data: bytes, end: int, what: str):
    if end > len(data):
        raise TruncatedFile(f"{what} extends past end of file ({end} > {len(data)} bytes)")


def parse_md2(data: bytes, interpolation: str = "linear") -> VertexAnimatedSurface:
    _need(data, HEADER.size, "header")
    magic, *vals = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise BadMagic(f"bad magic {magic!r}, expected {MAGIC!r}")
    h = dict(zip(HEADER_FIELDS, vals))
    if h["version"] != VERSION:
        raise UnsupportedVersion(f"MD2 version {h['version']} is not supported (only {VERSION})")
    nv, nt, nf = h["num_vertices"], h["num_tris"], h["num_frames"]
    if min(nv, nt, nf, h["num_st"], h["num_skins"], h["num_glcmds"]) < 0:
        raise ParseError("negative lump count in header")
    if nf == 0 or nt == 0:
        raise ParseError("model has no frames or no triangles")
    framesize = h["framesize"]
    if framesize < FRAME_HEADER.size + 4 * nv:
        raise ParseError(f"frame size {framesize} too small for {nv} vertices")

    _need(data, h["ofs_tris"] + 12 * nt, "triangle lump")
    tris = np.frombuffer(data, dtype="<u2", count=6 * nt, offset=h["ofs_tris"]).reshape(nt, 6).astype(np.int64)
    vidx, tidx = tris[:, :3], tris[:, 3:]
    if (vidx >= nv).any():
        raise ParseError("triangle references a vertex beyond num_vertices")

    _need(data, h["ofs_frames"] + framesize * nf, "frame lump")
    positions = np.empty((nf, nv, 3))
    normals = np.empty((nf, nv, 3))
    names = []
    for k in range(nf):
        off = h["ofs_frames"] + k * framesize
        *st, raw_name = FRAME_HEADER.unpack_from(data, off)
        scale, translate = np.array(st[:3], dtype=np.float32), np.array(st[3:], dtype=np.float32)
        names.append(raw_name.split(b"\0", 1)[0].decode("ascii", "replace"))
        verts = np.frombuffer(data, dtype=np.uint8, count=4 * nv, offset=off + FRAME_HEADER.size).reshape(nv, 4)
        # float32 arithmetic, as the format's reference decoder does
        positions[k] = (scale * verts[:, :3].astype(np.float32) + translate).astype(np.float64)
        ni = verts[:, 3].astype(np.int64)
        if (ni >= len(MD2_NORMALS)).any():
            raise ParseError("normal index beyond the 162-entry table")
        normals[k] = MD2_NORMALS[ni]

    skins = []
    _need(data, h["ofs_skins"] + 64 * h["num_skins"], "skin lump")
    for s in range(h["num_skins"]):
        raw = data[h["ofs_skins"] + 64 * s : h["ofs_skins"] + 64 * (s + 1)]
        skins.append(raw.split(b"\0", 1)[0].decode("ascii", "replace"))
    _need(data, h["ofs_st"] + 4 * h["num_st"], "texture coordinate lump")
    st_arr = np.frombuffer(data, dtype="<i2", count=2 * h["num_st"], offset=h["ofs_st"]).reshape(-1, 2).copy()
    _need(data, h["ofs_glcmds"] + 4 * h["num_glcmds"], "GL command lump")
    gl = np.frombuffer(data, dtype="<i4", count=h["num_glcmds"], offset=h["ofs_glcmds"]).copy()

    ccw = vidx[:, [0, 2, 1]]
    surface = build_mesh(positions[0], ccw, normals=normals[0])
    anim = VertexAnimatedSurface(surface, positions, normals, group_frames(names), interpolation, names)
    anim.extras = MD2Extras(skins, st_arr, tidx[:, [0, 2, 1]].copy(), gl, (h["skinwidth"], h["skinheight"]))
    return anim


def load_md2(src, interpolation: str = "linear") -> VertexAnimatedSurface:
    """Load an MD2 model from a path, bytes, or binary stream."""
    if isinstance(src, (bytes, bytearray, memoryview)):
        return parse_md2(bytes(src), interpolation)
    if isinstance(src, (str, os.PathLike)):
        with open(src, "rb") as fh:
            return parse_md2(fh.read(), interpolation)
    return parse_md2(src.read(), interpolation)


def encode_md2(
    frames: list[tuple[str, np.ndarray, np.ndarray, np.ndarray, np.ndarray]],
    triangles,
    skins: list[str] = (),
    st=None,
    tri_st=None,
    skin_size: tuple[int, int] = (0, 0),
) -> bytes:
    """Serialize an MD2 file.

    ``frames`` holds ``(name, scale, translate, vertex_bytes (V,3), normal_index (V,))``;
    ``triangles`` are vertex index triples in the file's (clockwise) winding.
    """
    tris = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    nv = len(frames[0][3])
    st = np.zeros((0, 2), np.int16) if st is None else np.asarray(st, np.int16).reshape(-1, 2)
    tri_st = np.zeros_like(tris) if tri_st is None else np.asarray(tri_st, np.int64).reshape(-1, 3)
    framesize = FRAME_HEADER.size + 4 * nv
    ofs_skins = HEADER.size
    ofs_st = ofs_skins + 64 * len(skins)
    ofs_tris = ofs_st + 4 * len(st)
    ofs_frames = ofs_tris + 12 * len(tris)
    ofs_glcmds = ofs_frames + framesize * len(frames)
    ofs_end = ofs_glcmds + 4
    out = bytearray(
        HEADER.pack(
            MAGIC, VERSION, skin_size[0], skin_size[1], framesize, len(skins), nv, len(st), len(tris), 1,
            len(frames), ofs_skins, ofs_st, ofs_tris, ofs_frames, ofs_glcmds, ofs_end,
        )
    )
    for s in skins:
        out += s.encode("ascii")[:63].ljust(64, b"\0")
    out += st.astype("<i2").tobytes()
    out += np.hstack([tris, tri_st]).astype("<u2").tobytes()
    for name, scale, translate, vb, ni in frames:
        out += FRAME_HEADER.pack(*map(float, scale), *map(float, translate), name.encode("ascii")[:15].ljust(16, b"\0"))
        v = np.hstack([np.asarray(vb, np.uint8).reshape(nv, 3), np.asarray(ni, np.uint8).reshape(nv, 1)])
        out += v.tobytes()
    out += struct.pack("<i", 0)
    return bytes(out)


def compress_frame(positions: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-axis ``scale``, ``translate`` and rounded bytes for one frame."""
    p = np.asarray(positions, dtype=float)
    lo, hi = p.min(0), p.max(0)
    scale = np.where(hi > lo, (hi - lo) / 255.0, 1.0)
    b = np.clip(np.floor((p - lo) / scale + 0.5), 0, 255).astype(np.uint8)
    return scale, lo, b


def nearest_normal_index(normals: np.ndarray) -> np.ndarray:
    return np.argmax(np.asarray(normals) @ MD2_NORMALS.T, axis=1).astype(np.uint8)
