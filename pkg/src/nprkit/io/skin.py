"""Skinned meshes in the ``zskin-1`` JSON schema (documented in docs/zskin.md).

Bones may be listed in any order; they are reordered parents-first and
every bone reference (parent, weights, tracks) is remapped.  Bones are
referenced by list index or by name.
"""
from __future__ import annotations

import json
import logging
import os

import numpy as np

from ..animation import Bone, Skeleton, SkinnedSurface, Track, Transform
from ..errors import BadWeight, CyclicSkeleton, ParseError
from ..mesh import build_mesh

log = logging.getLogger(__name__)

FORMAT = "zskin-1"
WEIGHT_TOLERANCE = 1e-4
UNIT_TOLERANCE = 1e-6


def _vec(x, n, what):
    try:
        a = np.asarray(x, dtype=float)
    except (TypeError, ValueError):
        raise ParseError(f"{what} must be numeric") from None
    if a.shape != (n,) or not np.isfinite(a).all():
        raise ParseError(f"{what} must be {n} finite numbers")
    return a


def _unit_quat(q, what):
    q = _vec(q, 4, what)
    n = np.linalg.norm(q)
    if n == 0:
        raise ParseError(f"{what} is a zero quaternion")
    if abs(n - 1) > UNIT_TOLERANCE:
        log.warning("%s has length %.6g; renormalized", what, n)
    return q / n


def _transform(d, what):
    if not isinstance(d, dict):
        raise ParseError(f"{what} must be an object with rotation and translation")
    rot = _unit_quat(d.get("rotation", [1, 0, 0, 0]), f"{what}.rotation")
    tr = _vec(d.get("translation", [0, 0, 0]), 3, f"{what}.translation")
    return Transform(tuple(rot), tuple(tr))


def _bone_ref(ref, names, n, what):
    if isinstance(ref, bool):
        raise ParseError(f"{what}: bad bone reference {ref!r}")
    if isinstance(ref, int):
        if not 0 <= ref < n:
            raise ParseError(f"{what}: bone index {ref} out of range")
        return ref
    if isinstance(ref, str) and ref in names:
        return names[ref]
    raise ParseError(f"{what}: unknown bone {ref!r}")


def _parents_first(parents: list[int | None], names: list[str]) -> list[int]:
    """Depth-first order placing each bone after its parent; a valid input order is kept."""
    state = [0] * len(parents)  # 0 new, 1 on the current path, 2 placed
    order: list[int] = []
    for start in range(len(parents)):
        path = []
        b = start
        while b is not None and state[b] == 0:
            state[b] = 1
            path.append(b)
            b = parents[b]
        if b is not None and state[b] == 1:
            cyc = path[path.index(b):] + [b]
            raise CyclicSkeleton("bone hierarchy has a cycle: " + " -> ".join(names[i] for i in cyc))
        for i in reversed(path):
            state[i] = 2
            order.append(i)
    return order


def parse_skin(doc: dict) -> SkinnedSurface:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ParseError(f"document is not {FORMAT!r}")
    try:
        mesh = doc["mesh"]
        bones_in = doc["bones"]
        weights_in = doc["weights"]
    except KeyError as e:
        raise ParseError(f"missing top-level key {e.args[0]!r}") from None
    try:
        positions = np.asarray(mesh["positions"], dtype=float)
        triangles = np.asarray(mesh["triangles"], dtype=np.int64)
    except (KeyError, TypeError, ValueError):
        raise ParseError("mesh needs numeric 'positions' and 'triangles'") from None
    if positions.ndim != 2 or positions.shape[1] != 3 or triangles.ndim != 2 or triangles.shape[1] != 3:
        raise ParseError("mesh positions must be (V,3) and triangles (F,3)")
    normals = mesh.get("normals")
    if normals is not None:
        normals = np.asarray(normals, dtype=float)
        if normals.shape != positions.shape:
            raise ParseError("mesh normals must match positions")
        normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)

    if not isinstance(bones_in, list) or not bones_in:
        raise ParseError("bones must be a non-empty list")
    nb = len(bones_in)
    names = {}
    for i, b in enumerate(bones_in):
        if not isinstance(b, dict) or not isinstance(b.get("name"), str):
            raise ParseError(f"bone {i} needs a string name")
        if b["name"] in names:
            raise ParseError(f"duplicate bone name {b['name']!r}")
        names[b["name"]] = i
    parents = []
    for i, b in enumerate(bones_in):
        p = b.get("parent")
        parents.append(None if p is None else _bone_ref(p, names, nb, f"bone {b['name']!r} parent"))

    order = _parents_first(parents, [b["name"] for b in bones_in])
    new_index = {old: new for new, old in enumerate(order)}
    bones = [
        Bone(
            bones_in[old]["name"],
            None if parents[old] is None else new_index[parents[old]],
            _transform(bones_in[old].get("bind", {}), f"bone {bones_in[old]['name']!r} bind"),
        )
        for old in order
    ]
    skeleton = Skeleton(bones)

    nv = len(positions)
    if not isinstance(weights_in, list) or len(weights_in) != nv:
        raise ParseError(f"weights must list one entry per vertex ({nv})")
    W = np.zeros((nv, nb))
    for v, entry in enumerate(weights_in):
        if not entry:
            raise BadWeight(f"vertex {v} has no bone weights")
        for pair in entry:
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ParseError(f"vertex {v}: weights are [bone, weight] pairs")
            b = new_index[_bone_ref(pair[0], names, nb, f"vertex {v} weight")]
            w = float(pair[1])
            if w < 0 or not np.isfinite(w):
                raise BadWeight(f"vertex {v}: negative or non-finite weight {pair[1]!r}")
            W[v, b] += w
    sums = W.sum(1)
    if (sums == 0).any():
        raise BadWeight(f"vertex {int(np.argmax(sums == 0))} has zero total weight")
    off = np.abs(sums - 1) > WEIGHT_TOLERANCE
    if off.any():
        log.warning("%d vertices have weights not summing to 1; renormalized", int(off.sum()))
    W /= sums[:, None]

    animations = {}
    for aname, tracks in (doc.get("animations") or {}).items():
        if not isinstance(tracks, dict):
            raise ParseError(f"animation {aname!r} must map bones to tracks")
        out = {}
        for ref, tr in tracks.items():
            key = int(ref) if isinstance(ref, str) and ref.isdigit() and ref not in names else ref
            b = new_index[_bone_ref(key, names, nb, f"animation {aname!r}")]
            try:
                times = tr["times"]
                k = len(times)
                rots = [_unit_quat(q, f"{aname}/{ref} rotation") for q in tr.get("rotations", [[1, 0, 0, 0]] * k)]
                trans = tr.get("translations", [[0, 0, 0]] * k)
                out[b] = Track(times, rots, trans)
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(f"animation {aname!r} track {ref!r}: {e}") from None
        animations[aname] = out

    surface = build_mesh(positions, triangles, normals=normals)
    return SkinnedSurface(surface, skeleton, W, animations)


def load_skin(src) -> SkinnedSurface:
    """Load from a path, JSON text/bytes, a stream or an already-parsed dict."""
    if isinstance(src, dict):
        return parse_skin(src)
    try:
        if isinstance(src, (bytes, bytearray)):
            doc = json.loads(src)
        elif isinstance(src, str) and src.lstrip().startswith("{"):
            doc = json.loads(src)
        elif isinstance(src, (str, os.PathLike)):
            with open(src, "rb") as fh:
                doc = json.load(fh)
        else:
            doc = json.load(src)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", e.lineno) from None
    return parse_skin(doc)


def dump_skin(skinned: SkinnedSurface) -> dict:
    """Inverse of :func:`parse_skin` (bones already parents-first)."""
    sk = skinned.skeleton
    doc = {
        "format": FORMAT,
        "mesh": {
            "positions": skinned.surface.positions.tolist(),
            "triangles": skinned.surface.faces.tolist(),
        },
        "bones": [
            {
                "name": b.name,
                "parent": b.parent,
                "bind": {"rotation": list(b.bind.rotation), "translation": list(b.bind.translation)},
            }
            for b in sk.bones
        ],
        "weights": [[[int(j), float(w)] for j, w in enumerate(row) if w > 0] for row in skinned.weights],
        "animations": {
            name: {
                sk.bones[b].name: {
                    "times": tr.times.tolist(),
                    "rotations": tr.rotations.tolist(),
                    "translations": tr.translations.tolist(),
                }
                for b, tr in tracks.items()
            }
            for name, tracks in skinned.animations.items()
        },
    }
    return doc
