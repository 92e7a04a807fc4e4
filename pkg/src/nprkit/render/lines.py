"""Line rendering: spline smoothing, depth-tested raster strokes, SVG export."""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import quoteattr

import numpy as np

from ..errors import DimensionMismatch, TooFewPoints
from ..splines import bspline_weights, catmull_rom_weights
from .camera import Camera, project
from .framebuffer import Framebuffer

DEFAULT_DEPTH_BIAS = 1e-3
SMOOTHING = ("none", "catmull-rom", "b-spline")


@dataclass(frozen=True)
class LineStyle:
    smoothing: str = "none"
    samples: int = 4  # per segment
    width: float = 1.0  # pixels
    color: tuple = (0.0, 0.0, 0.0)
    antialias: bool = False

    def __post_init__(self):
        if self.smoothing not in SMOOTHING:
            raise ValueError(f"smoothing must be one of {SMOOTHING}")
        if self.samples < 1:
            raise ValueError("samples per segment must be >= 1")
        if self.width <= 0:
            raise ValueError("stroke width must be positive")


def smooth_polyline(points, style: LineStyle, closed: bool = False) -> np.ndarray:
    """Resample a polyline with a uniform cubic spline.

    Each segment ``P[i] -> P[i+1]`` contributes ``samples`` points at
    ``u = k / samples``.  Open curves end with the sample at ``u = 1`` of the
    last segment and duplicate their end points as outer controls; closed
    curves wrap around.  Catmull-Rom interpolates every control point;
    the B-spline approximates them.
    """
    P = np.asarray(points, dtype=float)
    if len(P) < 2:
        raise TooFewPoints(f"a polyline needs at least 2 points, got {len(P)}")
    if style.smoothing == "none":
        return P.copy()
    basis = catmull_rom_weights if style.smoothing == "catmull-rom" else bspline_weights
    n = len(P)
    n_seg = n if closed else n - 1
    i = np.arange(n_seg)
    ctrl = np.stack([i - 1, i, i + 1, i + 2], axis=1)
    ctrl = ctrl % n if closed else np.clip(ctrl, 0, n - 1)
    u = np.arange(style.samples) / style.samples
    w = basis(u)  # (samples, 4)
    out = np.einsum("sk,nkd->nsd", w, P[ctrl]).reshape(-1, P.shape[1])
    if not closed:
        out = np.vstack([out, basis(1.0) @ P[ctrl[-1]]])
    return out


def _check_target(target, camera):
    if (target.width, target.height) != (camera.width, camera.height):
        raise DimensionMismatch(
            f"target {target.width}x{target.height} does not match viewport {camera.width}x{camera.height}"
        )


def _segment_pixels(a, b):
    """Pixels stepped along a segment's major axis, one per column or row."""
    d = b - a
    n = int(np.ceil(np.max(np.abs(d)))) + 1
    t = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
    pts = a + t[:, None] * d
    return np.floor(pts).astype(np.int64), t


def _plot(target, px, py, t, da, db, color, coverage, depth_bias):
    ok = (px >= 0) & (px < target.width) & (py >= 0) & (py < target.height)
    px, py, t, coverage = px[ok], py[ok], t[ok], coverage[ok]
    if len(px) == 0:
        return 0
    d = da + t * (db - da)
    vis = d - depth_bias < target.depth[py, px]
    px, py, cov = px[vis], py[vis], coverage[vis][:, None]
    c = target.color[py, px]
    c[:, :3] = (1 - cov) * c[:, :3] + cov * np.asarray(color, dtype=float)
    c[:, 3] = np.maximum(c[:, 3], cov[:, 0])
    target.color[py, px] = c
    return len(px)


def _draw_one(target, a, b, da, db, color, width, antialias, depth_bias):
    if not antialias:
        pix, t = _segment_pixels(a, b)
        r = int(round(width)) // 2
        if r == 0:
            pix, t = _dedupe(pix, t)
            return _plot(target, pix[:, 0], pix[:, 1], t, da, db, color, np.ones(len(t)), depth_bias)
        offs = np.arange(-r, int(round(width)) - r)
        ox, oy = np.meshgrid(offs, offs)
        allp = (pix[:, None, :] + np.stack([ox.ravel(), oy.ravel()], 1)[None]).reshape(-1, 2)
        allt = np.repeat(t, ox.size)
        allp, allt = _dedupe(allp, allt)
        return _plot(target, allp[:, 0], allp[:, 1], allt, da, db, color, np.ones(len(allt)), depth_bias)
    # coverage falls off linearly over one pixel outside the stroke's half-width
    half = width / 2.0
    lo = np.floor(np.minimum(a, b) - half - 1).astype(int)
    hi = np.ceil(np.maximum(a, b) + half + 1).astype(int)
    xs, ys = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1))
    c = np.stack([xs.ravel() + 0.5, ys.ravel() + 0.5], 1)
    d = b - a
    L2 = float(d @ d)
    t = np.clip(((c - a) @ d) / L2, 0, 1) if L2 > 0 else np.zeros(len(c))
    dist = np.linalg.norm(c - (a + t[:, None] * d), axis=1)
    cov = np.clip(half + 0.5 - dist, 0.0, 1.0)
    m = cov > 0
    return _plot(target, xs.ravel()[m], ys.ravel()[m], t[m], da, db, color, cov[m], depth_bias)


def _dedupe(pix, t):
    _, idx = np.unique(pix, axis=0, return_index=True)
    idx = np.sort(idx)
    return pix[idx], t[idx]


def draw_segments(target: Framebuffer, camera: Camera, p0, p1, color, width=1.0, antialias=False,
                  depth_bias=DEFAULT_DEPTH_BIAS) -> int:
    """Draw 3D segments ``p0[i] -> p1[i]``; returns the number of pixel writes.

    Segments with a clipped end point are skipped.  Line depth is
    interpolated linearly in screen space and tested against
    ``target.depth - depth_bias``; lines do not write depth.
    """
    xy0, d0, c0 = project(camera, np.atleast_2d(p0))
    xy1, d1, c1 = project(camera, np.atleast_2d(p1))
    n = 0
    for k in np.flatnonzero(~(c0 | c1)):
        n += _draw_one(target, xy0[k], xy1[k], d0[k], d1[k], color, width, antialias, depth_bias)
    return n


def render_lines(contours, camera: Camera, style: LineStyle, target: Framebuffer,
                 depth_bias: float = DEFAULT_DEPTH_BIAS) -> int:
    """Smooth, project and stroke every polyline of ``contours``.

    Returns the number of pixel writes.
    """
    _check_target(target, camera)
    n = 0
    for pl in contours:
        pts = smooth_polyline(pl.points, style, pl.closed)
        if pl.closed:
            pts = np.vstack([pts, pts[:1]])
        n += draw_segments(target, camera, pts[:-1], pts[1:], style.color, style.width, style.antialias, depth_bias)
    return n


def _fmt(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _hex(color) -> str:
    c = np.clip(np.floor(np.asarray(color, dtype=float) * 255 + 0.5), 0, 255).astype(int)
    return "#{:02x}{:02x}{:02x}".format(*c)


def export_svg(contours, camera: Camera, style: LineStyle | None = None) -> str:
    """SVG 1.1 document with one element per polyline.

    ``contours`` is one contour set or a list of them; each set becomes a
    ``<g>`` group named after it.

    Fully visible closed loops become ``<path>`` elements ending in ``Z``;
    fully visible open curves become ``<polyline>``.  Polylines with clipped
    points become a ``<path>`` whose visible runs are separate subpaths
    (possibly empty).
    """
    style = style or LineStyle()
    stroke = f'fill="none" stroke={quoteattr(_hex(style.color))} stroke-width="{_fmt(style.width)}"'
    stroke += ' stroke-linecap="round" stroke-linejoin="round"'
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{camera.width}" height="{camera.height}" '
        f'viewBox="0 0 {camera.width} {camera.height}">',
    ]
    sets = list(contours) if isinstance(contours, (list, tuple)) and all(hasattr(c, "polylines") for c in contours) else [contours]
    for cs in sets:
        out.extend(_svg_group(cs, camera, style, stroke))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _svg_group(contours, camera, style, stroke) -> list[str]:
    name = getattr(contours, "name", "")
    out = [f"<g class={quoteattr(name or 'contours')}>"]
    for pl in contours:
        pts = smooth_polyline(pl.points, style, pl.closed)
        xy, _, clipped = project(camera, pts)
        coords = [f"{_fmt(x)},{_fmt(y)}" for x, y in xy]
        if not clipped.any():
            if pl.closed:
                out.append(f'<path d="M{" L".join(coords)} Z" {stroke}/>')
            else:
                out.append(f'<polyline points="{" ".join(coords)}" {stroke}/>')
            continue
        runs, cur = [], []
        for c, hidden in zip(coords, clipped):
            if hidden:
                if len(cur) >= 2:
                    runs.append(cur)
                cur = []
            else:
                cur.append(c)
        if len(cur) >= 2:
            runs.append(cur)
        d = " ".join("M" + " L".join(r) for r in runs)
        out.append(f'<path d="{d}" {stroke}/>')
    out.append("</g>")
    return out
