"""Wavefront OBJ and MTL subset.

Supported: ``v``, ``vn``, ``vt``, ``f`` (polygons fan-triangulated),
``mtllib`` and ``usemtl``.  Groups, objects and smoothing groups are
ignored.  A mesh vertex is created per distinct ``(v, vt, vn)`` index
triple, so a position indexed with different normals or texture
coordinates is split into several vertices.
"""
from __future__ import annotations

import io
import logging
import os
from pathlib import Path

import numpy as np

from ..errors import ParseError
from ..mesh import Material, Surface, build_mesh

log = logging.getLogger(__name__)

_IGNORED_OBJ = {"g", "o", "s", "l", "p", "vp", "usemap", "maplib", "cstype", "deg", "bmat", "step"}


def _text_lines(src):
    if isinstance(src, (bytes, bytearray)):
        text = bytes(src).decode("utf-8", "replace")
    elif isinstance(src, (str, os.PathLike)) and not (isinstance(src, str) and "\n" in src):
        with open(src, "rb") as fh:
            text = fh.read().decode("utf-8", "replace")
    elif isinstance(src, str):
        text = src
    else:
        raw = src.read()
        text = raw.decode("utf-8", "replace") if isinstance(raw, bytes) else raw
    # splitlines handles LF, CRLF and lone CR alike
    return text.splitlines()


def _floats(parts, n_min, n_max, lineno, what):
    if not n_min <= len(parts) <= n_max:
        raise ParseError(f"{what} expects {n_min}-{n_max} numbers, got {len(parts)}", lineno)
    try:
        return [float(x) for x in parts]
    except ValueError:
        raise ParseError(f"{what} has a non-numeric value", lineno) from None


def _resolve(idx: str, count: int, lineno: int, what: str) -> int:
    try:
        i = int(idx)
    except ValueError:
        raise ParseError(f"bad {what} index {idx!r}", lineno) from None
    if i > 0:
        r = i - 1
    elif i < 0:
        r = count + i
    else:
        raise ParseError(f"{what} index 0 is invalid (indices start at 1)", lineno)
    if not 0 <= r < count:
        raise ParseError(f"{what} index {i} out of range ({count} defined)", lineno)
    return r


def _corner(token: str, counts, lineno):
    parts = token.split("/")
    if len(parts) > 3 or parts[0] == "":
        raise ParseError(f"malformed face entry {token!r}", lineno)
    v = _resolve(parts[0], counts[0], lineno, "vertex")
    vt = _resolve(parts[1], counts[1], lineno, "texture") if len(parts) > 1 and parts[1] else -1
    vn = _resolve(parts[2], counts[2], lineno, "normal") if len(parts) > 2 and parts[2] else -1
    return v, vt, vn


def parse_obj(src, base_dir: str | os.PathLike | None = None, materials: dict[str, Material] | None = None) -> Surface:
    """Parse OBJ text into a :class:`Surface`.

    File-provided normals override the computed ones on vertices whose
    corners all reference a normal.  Texture coordinates, when present,
    are stored in the vertex property ``"uv"``.  ``mtllib`` files are
    resolved relative to ``base_dir``; missing libraries are warned about.
    """
    vs, vts, vns = [], [], []
    corner_ids: dict[tuple[int, int, int], int] = {}
    corners: list[tuple[int, int, int]] = []
    tris: list[tuple[int, int, int]] = []
    tri_mtl: list[str | None] = []
    mtls: dict[str, Material] = dict(materials or {})
    current = None

    for lineno, line in enumerate(_text_lines(src), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        key, args = tok[0], tok[1:]
        if key == "v":
            vs.append(_floats(args, 3, 4, lineno, "v")[:3])
        elif key == "vn":
            vns.append(_floats(args, 3, 3, lineno, "vn"))
        elif key == "vt":
            vts.append((_floats(args, 1, 3, lineno, "vt") + [0.0])[:2])
        elif key == "f":
            if len(args) < 3:
                raise ParseError("face needs at least 3 vertices", lineno)
            ids = []
            for t in args:
                c = _corner(t, (len(vs), len(vts), len(vns)), lineno)
                if c not in corner_ids:
                    corner_ids[c] = len(corners)
                    corners.append(c)
                ids.append(corner_ids[c])
            for k in range(1, len(ids) - 1):
                tris.append((ids[0], ids[k], ids[k + 1]))
                tri_mtl.append(current)
        elif key == "mtllib":
            for name in args:
                path = Path(base_dir or ".") / name
                try:
                    mtls.update(load_mtl(path))
                except OSError:
                    log.warning("line %d: material library %s not found", lineno, path)
        elif key == "usemtl":
            current = args[0] if args else None
        elif key in _IGNORED_OBJ:
            continue
        else:
            log.warning("line %d: unsupported OBJ directive %r skipped", lineno, key)

    if not tris:
        raise ParseError("OBJ file defines no faces")
    # vertices ordered by (v, vt, vn) so unsplit files keep their numbering
    order = sorted(range(len(corners)), key=corners.__getitem__)
    rank = np.empty(len(corners), dtype=np.int64)
    rank[order] = np.arange(len(corners))
    corners = [corners[i] for i in order]
    tris = rank[np.asarray(tris)]
    cv = np.array([c[0] for c in corners])
    P = np.asarray(vs, dtype=float)[cv]
    normals = None
    cn = np.array([c[2] for c in corners])
    if len(vns) and (cn >= 0).all():
        normals = np.asarray(vns, dtype=float)[cn]
        ln = np.linalg.norm(normals, axis=1, keepdims=True)
        normals = np.divide(normals, ln, out=np.zeros_like(normals), where=ln > 0)
        if (ln == 0).any():
            normals = None
    used = [m for m in tri_mtl if m is not None]
    material = None
    if used:
        first = used[0]
        material = mtls.get(first)
        if material is None:
            log.warning("material %r not defined; using defaults", first)
            material = Material(name=first)
    surf = build_mesh(P, tris, normals=normals, material=material)
    if normals is None and len(vns):
        partial = cn >= 0
        if partial.any():
            n = np.asarray(vns, dtype=float)[cn[partial]]
            surf.normals[partial] = n / np.linalg.norm(n, axis=1, keepdims=True)
    surf.materials.update(mtls)
    if used and len(set(used)) > 1:
        fm = surf.add_property("face", "material", dtype=object)
        fm.data[:] = np.array(tri_mtl, dtype=object)
    ct = np.array([c[1] for c in corners])
    if len(vts) and (ct >= 0).any():
        uv = surf.add_property("vertex", "uv", shape=(2,))
        uv.data[ct >= 0] = np.asarray(vts, dtype=float)[ct[ct >= 0]]
    return surf


def load_obj(src, materials: dict[str, Material] | None = None) -> Surface:
    """Load from a path, bytes, or text/binary stream."""
    base = Path(src).parent if isinstance(src, (str, os.PathLike)) and not (isinstance(src, str) and "\n" in src) else None
    return parse_obj(src, base_dir=base, materials=materials)


def parse_mtl(src) -> dict[str, Material]:
    """Material table from MTL text: ``newmtl``, ``Ka``, ``Kd``, ``Ks``, ``Ns``, ``map_Kd``.

    Unset fields keep the :class:`Material` defaults (``Ns`` defaults to 32).
    """
    table: dict[str, dict] = {}
    cur = None
    for lineno, line in enumerate(_text_lines(src), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, *args = line.split()
        if key == "newmtl":
            if not args:
                raise ParseError("newmtl needs a name", lineno)
            cur = " ".join(args)
            table[cur] = {"name": cur}
            continue
        if cur is None:
            raise ParseError(f"{key} before any newmtl", lineno)
        if key in ("Ka", "Kd", "Ks"):
            rgb = _floats(args, 1, 3, lineno, key)
            if len(rgb) == 1:
                rgb = rgb * 3
            elif len(rgb) == 2:
                raise ParseError(f"{key} expects 1 or 3 numbers", lineno)
            table[cur][{"Ka": "ambient", "Kd": "diffuse", "Ks": "specular"}[key]] = tuple(rgb)
        elif key == "Ns":
            table[cur]["shininess"] = _floats(args, 1, 1, lineno, key)[0]
        elif key == "map_Kd":
            if not args:
                raise ParseError("map_Kd needs a file name", lineno)
            table[cur]["diffuse_texture"] = args[-1]
        else:
            log.warning("line %d: unsupported MTL directive %r skipped", lineno, key)
    return {name: Material(**fields) for name, fields in table.items()}


def load_mtl(src) -> dict[str, Material]:
    return parse_mtl(src)


def dump_obj(surface: Surface, normals: bool = True) -> str:
    """OBJ text for a surface (positions, optional normals, 1-based faces)."""
    out = io.StringIO()
    for p in surface.positions:
        out.write("v {:.17g} {:.17g} {:.17g}\n".format(*p))
    if normals:
        for n in surface.normals:
            out.write("vn {:.17g} {:.17g} {:.17g}\n".format(*n))
    for f in surface.faces + 1:
        if normals:
            out.write("f {0}//{0} {1}//{1} {2}//{2}\n".format(*f))
        else:
            out.write("f {} {} {}\n".format(*f))
    return out.getvalue()
