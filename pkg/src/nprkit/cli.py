"""Command-line entry points.

Commands: ``render``, ``animate``, ``curvature``, ``contours`` and ``lapped``.
Options can also come from a JSON file given with ``--config``, whose keys
are the option names with dashes replaced by underscores; explicit flags
override file values.

Exit codes: 0 success, 2 input parse or configuration error, 3 file I/O
error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import contours as ct
from .animation import MeshState, SkinnedSurface, VertexAnimatedSurface, as_state, deform
from .curvature import compute_curvature
from .errors import NprError
from .io.ppm import write_ppm
from .io.registry import default_registry
from .mesh import Surface

log = logging.getLogger("nprkit")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4
CONTOUR_KINDS = ("silhouette", "suggestive")


class ConfigError(NprError, ValueError):
    pass


@dataclass
class RenderConfig:
    input: str = ""
    output: list = field(default_factory=list)
    camera: str | None = None
    size: str = "256x256"
    style: str = "gooch"
    style_params: dict = field(default_factory=dict)
    contours: list = field(default_factory=lambda: ["silhouette"])
    derivative_threshold: float = ct.DEFAULT_DERIVATIVE_THRESHOLD
    angle_threshold: float = ct.DEFAULT_ANGLE_THRESHOLD
    smoothing: str = "none"
    samples: int = 4
    line_width: float = 1.0
    line_color: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    antialias: bool = False
    background: list = field(default_factory=lambda: [1.0, 1.0, 1.0])
    passes: list | None = None
    wireframe: bool = False
    animation: str | None = None
    time: float | None = None
    time_range: list | None = None
    frames: int = 1
    out_dir: str = "."
    radius: float | None = None
    iterations: int = 3
    atlas: str | None = None

    def validate(self, command: str) -> None:
        if not self.input:
            raise ConfigError("no input file given")
        unknown = [c for c in self.contours if c not in CONTOUR_KINDS]
        if unknown:
            raise ConfigError(f"unknown contour kind {unknown[0]!r}; choose from {', '.join(CONTOUR_KINDS)}")
        if self.frames < 1:
            raise ConfigError("frame count must be >= 1")
        allowed = {
            "render": (".ppm", ".svg"),
            "animate": (),
            "curvature": (".csv",),
            "contours": (".json", ".svg"),
            "lapped": (".json",),
        }[command]
        for out in self.output:
            if os.path.splitext(out)[1].lower() not in allowed:
                raise ConfigError(f"{command} cannot write {out!r}; expected one of {', '.join(allowed)}")
        if command != "animate" and not self.output:
            raise ConfigError(f"{command} needs an output file (-o)")


# -- argument parsing ----------------------------------------------------------

def _common(p: argparse.ArgumentParser, outputs: bool = True):
    p.add_argument("input", nargs="?", default=None, help="mesh file (.obj, .md2, .zskin/.json)")
    if outputs:
        p.add_argument("-o", "--output", action="append", default=None, help="output file; repeatable")
    p.add_argument("--config", default=None, help="JSON file with option defaults")
    p.add_argument("-v", "--verbose", action="store_true", default=None)


def _view(p):
    p.add_argument("--camera", default=None, help='"eye=x,y,z;target=x,y,z;up=x,y,z;fov=deg;size=WxH" or ortho=h')
    p.add_argument("--size", default=None, help="viewport WxH when the camera is framed automatically")
    p.add_argument("--contours", default=None, help="comma list of silhouette,suggestive (empty for none)")
    p.add_argument("--derivative-threshold", type=float, default=None)
    p.add_argument("--angle-threshold", type=float, default=None, help="degrees")
    p.add_argument("--animation", default=None)
    p.add_argument("--time", type=float, default=None)


def _style(p):
    p.add_argument("--style", default=None, choices=["phong", "gooch", "toon", "normals", "constant", "none"])
    p.add_argument("--style-params", default=None, help="JSON object of shader parameters")
    p.add_argument("--smoothing", default=None, choices=["none", "catmull-rom", "b-spline"])
    p.add_argument("--samples", type=int, default=None, help="spline samples per segment")
    p.add_argument("--line-width", type=float, default=None)
    p.add_argument("--line-color", default=None, help="r,g,b in [0,1]")
    p.add_argument("--antialias", action="store_true", default=None)
    p.add_argument("--wireframe", action="store_true", default=None)
    p.add_argument("--background", default=None, help="r,g,b in [0,1]")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nprkit", description="Non-photorealistic rendering toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("render", help="render one frame to PPM and/or SVG")
    _common(p)
    _view(p)
    _style(p)

    p = sub.add_parser("animate", help="render an animation to frame_NNNN.ppm files")
    _common(p, outputs=False)
    _view(p)
    _style(p)
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--time-range", default=None, help="start,end (default: the whole animation)")
    p.add_argument("--out-dir", default=None)

    p = sub.add_parser("curvature", help="write per-vertex curvature as CSV")
    _common(p)

    p = sub.add_parser("contours", help="extract contours to JSON or SVG")
    _common(p)
    _view(p)
    p.add_argument("--smoothing", default=None, choices=["none", "catmull-rom", "b-spline"])
    p.add_argument("--samples", type=int, default=None)

    p = sub.add_parser("lapped", help="cover the surface with parameterized patches")
    _common(p)
    p.add_argument("--radius", type=float, default=None, help="patch half-size (default 5 x mean edge length)")
    p.add_argument("--iterations", type=int, default=None, help="tangent field smoothing rounds")
    p.add_argument("--atlas", default=None, help="UV atlas PPM path")
    return ap


def _triple(s, what):
    try:
        v = [float(x) for x in str(s).split(",")]
    except ValueError:
        raise ConfigError(f"{what} must be three comma-separated numbers") from None
    if len(v) != 3:
        raise ConfigError(f"{what} must be three comma-separated numbers")
    return v


def resolve_config(args: argparse.Namespace) -> RenderConfig:
    """Defaults, then the config file, then explicit flags."""
    values: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file is not valid JSON: {e.msg} (line {e.lineno})") from None
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
    known = set(RenderConfig.__dataclass_fields__)
    for k, v in vars(args).items():
        if k in ("command", "config", "verbose") or v is None:
            continue
        values[k] = v
    bad = sorted(set(values) - known)
    if bad:
        raise ConfigError(f"unknown config key {bad[0]!r}")

    if isinstance(values.get("output"), str):
        values["output"] = [values["output"]]
    if isinstance(values.get("contours"), str):
        values["contours"] = [c.strip() for c in values["contours"].split(",") if c.strip()]
    if isinstance(values.get("style_params"), str):
        try:
            values["style_params"] = json.loads(values["style_params"])
        except json.JSONDecodeError:
            raise ConfigError("--style-params must be a JSON object") from None
    for key in ("line_color", "background"):
        if isinstance(values.get(key), str):
            values[key] = _triple(values[key], key.replace("_", "-"))
    if isinstance(values.get("time_range"), str):
        try:
            values["time_range"] = [float(x) for x in values["time_range"].split(",")]
        except ValueError:
            raise ConfigError("time range must be start,end") from None
    if values.get("time_range") is not None and len(values["time_range"]) != 2:
        raise ConfigError("time range must be start,end")
    try:
        return RenderConfig(**values)
    except TypeError as e:
        raise ConfigError(str(e)) from None


# -- shared steps ----------------------------------------------------------------

def load_input(path: str):
    reg = default_registry()
    reg.loader_for(path)  # fails early on an unknown extension
    if not os.path.exists(path):
        raise FileNotFoundError(f"input file {path!r} not found")
    return reg.load(path)


def base_surface(obj) -> Surface:
    if isinstance(obj, Surface):
        return obj
    return obj.surface


def _default_animation(obj, name):
    if name is not None:
        return name
    anims = obj.animations
    if not anims:
        from .errors import UnknownAnimation

        raise UnknownAnimation("input defines no animations")
    return next(iter(anims))


def time_range(obj, animation: str) -> tuple[float, float]:
    if isinstance(obj, VertexAnimatedSurface):
        return 0.0, float(obj.frame_count(animation) - 1)
    return obj.time_range(animation)


def state_at(obj, cfg: RenderConfig) -> MeshState:
    """The surface itself, or an animated input deformed to ``cfg.time``."""
    if isinstance(obj, Surface):
        if cfg.time is not None:
            raise ConfigError("input is not animated; --time needs an animated input")
        return as_state(obj)
    if cfg.time is None and cfg.animation is None:
        return as_state(obj.surface)
    name = _default_animation(obj, cfg.animation)
    t = time_range(obj, name)[0] if cfg.time is None else cfg.time
    return deform(obj, name, t)


def make_camera(surface: Surface, cfg: RenderConfig):
    from .render.camera import Camera, frame_surface, parse_camera

    w, h = _size(cfg.size)
    if cfg.camera:
        try:
            return parse_camera(cfg.camera, Camera(width=w, height=h))
        except ValueError as e:
            raise ConfigError(f"bad camera spec: {e}") from None
    return frame_surface(surface, width=w, height=h)


def _size(s):
    try:
        w, h = (int(x) for x in str(s).lower().split("x"))
    except ValueError:
        raise ConfigError(f"size must be WxH, got {s!r}") from None
    if w < 1 or h < 1:
        raise ConfigError("viewport size must be positive")
    return w, h


def line_style(cfg: RenderConfig):
    from .render.lines import LineStyle

    try:
        return LineStyle(cfg.smoothing, cfg.samples, cfg.line_width, tuple(cfg.line_color), cfg.antialias)
    except ValueError as e:
        raise ConfigError(str(e)) from None


def extract(state, camera, cfg: RenderConfig, curvature=None) -> list:
    """Requested contour sets; curvature is computed only if suggestive contours need it."""
    out = []
    for kind in cfg.contours:
        if kind == "silhouette":
            out.append(ct.extract_silhouettes(state, camera))
        else:
            if curvature is None:
                curvature = compute_curvature(state.to_surface(), attach=False)
            th = (cfg.derivative_threshold, cfg.angle_threshold)
            out.append(ct.extract_suggestive(state, curvature, camera, th))
    return out


def build_graph(cfg: RenderConfig, contour_sets: list):
    """Pass graph from ``cfg.passes`` or the default surface-then-lines graph."""
    from .render.image_ops import KERNELS
    from .render.passes import ImagePass, LinePass, PassGraph, SurfacePass
    from .render.shaders import make_shader

    style = line_style(cfg)

    def shader(name, params):
        try:
            return make_shader(name, **(params or {}))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad shader configuration: {e}") from None

    bg = tuple(cfg.background) + (1.0,)
    graph = PassGraph(background=bg)
    if cfg.passes is None:
        if cfg.style != "none":
            graph.add(SurfacePass(shader(cfg.style, cfg.style_params), wireframe=cfg.wireframe))
        if contour_sets:
            graph.add(LinePass(contour_sets, style))
        return graph
    for i, spec in enumerate(cfg.passes):
        if not isinstance(spec, dict) or "type" not in spec:
            raise ConfigError(f"pass {i} must be an object with a 'type'")
        kind, target = spec["type"], spec.get("target", "screen")
        if kind == "surface":
            graph.add(SurfacePass(shader(spec.get("shader", cfg.style), spec.get("params", cfg.style_params)),
                                  target, spec.get("cull", True), spec.get("wireframe", False)))
        elif kind == "image":
            op = spec.get("op")
            if op not in KERNELS:
                raise ConfigError(f"pass {i}: unknown image operator {op!r}; choose from {', '.join(sorted(KERNELS))}")
            if "source" not in spec:
                raise ConfigError(f"pass {i}: image pass needs a 'source' texture")
            graph.add(ImagePass(spec["source"], op, target))
        elif kind == "lines":
            names = spec.get("contours")
            sets = contour_sets if names is None else [s for s in contour_sets if s.name in names]
            graph.add(LinePass(sets, style, target))
        else:
            raise ConfigError(f"pass {i}: unknown pass type {kind!r}")
    return graph


def render_frame(state: MeshState, camera, cfg: RenderConfig, curvature=None):
    """One loop iteration: extract contours, run the pass graph; returns (framebuffer, contour sets)."""
    from .render.passes import Scene, run_pass_graph

    sets = extract(state, camera, cfg, curvature)
    graph = build_graph(cfg, sets)
    fb = run_pass_graph(graph, Scene(state, camera))
    return fb, sets


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# -- commands ----------------------------------------------------------------------

def cmd_render(cfg: RenderConfig) -> list[str]:
    from .render.lines import export_svg

    obj = load_input(cfg.input)
    state = state_at(obj, cfg)
    camera = make_camera(base_surface(obj), cfg)
    fb, sets = render_frame(state, camera, cfg)
    for out in cfg.output:
        if out.lower().endswith(".ppm"):
            write_ppm(fb.to_image(), out)
        else:
            _write_text(out, export_svg(sets, camera, line_style(cfg)))
        log.info("wrote %s", out)
    return cfg.output


def frame_times(start: float, end: float, n: int) -> np.ndarray:
    if n == 1:
        return np.array([start])
    return np.linspace(start, end, n)


def cmd_animate(cfg: RenderConfig) -> list[str]:
    obj = load_input(cfg.input)
    if not isinstance(obj, (VertexAnimatedSurface, SkinnedSurface)):
        raise ConfigError("input is not animated")
    name = _default_animation(obj, cfg.animation)
    start, end = cfg.time_range if cfg.time_range is not None else time_range(obj, name)
    camera = make_camera(obj.surface, cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    written = []
    for k, t in enumerate(frame_times(float(start), float(end), cfg.frames)):
        # the mesh changes every frame, so contours are extracted again each time
        state = deform(obj, name, float(t))
        fb, _ = render_frame(state, camera, cfg)
        path = os.path.join(cfg.out_dir, f"frame_{k:04d}.ppm")
        write_ppm(fb.to_image(), path)
        written.append(path)
        log.info("frame %d (t=%g) -> %s", k, t, path)
    return written


CSV_HEADER = ["id", "k1", "k2", "e1x", "e1y", "e1z", "e2x", "e2y", "e2z", "a", "b", "c", "d"]


def cmd_curvature(cfg: RenderConfig) -> list[str]:
    obj = load_input(cfg.input)
    surface = state_at(obj, cfg).to_surface()
    cv = compute_curvature(surface, attach=False)
    for out in cfg.output:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for i in range(surface.n_vertices):
                vals = [cv.k1[i], cv.k2[i], *cv.e1[i], *cv.e2[i], *cv.dcurv[i]]
                w.writerow([i] + [repr(float(x)) for x in vals])
    return cfg.output


def cmd_contours(cfg: RenderConfig) -> list[str]:
    from .render.lines import export_svg

    obj = load_input(cfg.input)
    state = state_at(obj, cfg)
    camera = make_camera(base_surface(obj), cfg)
    sets = extract(state, camera, cfg)
    for out in cfg.output:
        if out.lower().endswith(".svg"):
            _write_text(out, export_svg(sets, camera, line_style(cfg)))
        else:
            _write_text(out, json.dumps({"contours": [s.to_dict() for s in sets]}, indent=1) + "\n")
    return cfg.output


def cmd_lapped(cfg: RenderConfig) -> list[str]:
    from .lapped import build_tangent_field, cover_surface, patches_to_json, uv_atlas

    obj = load_input(cfg.input)
    surface = state_at(obj, cfg).to_surface()
    radius = cfg.radius if cfg.radius is not None else 5.0 * surface.feature_size
    if not radius > 0:
        raise ConfigError("patch radius must be positive")
    if cfg.iterations < 0:
        raise ConfigError("iterations must be >= 0")
    cv = compute_curvature(surface, derivatives=False, attach=False)
    fld = build_tangent_field(surface, cv, cfg.iterations)
    patches = cover_surface(surface, fld, radius)
    log.info("%d patches of radius %g", len(patches), radius)
    for out in cfg.output:
        _write_text(out, patches_to_json(patches))
    written = list(cfg.output)
    if cfg.atlas:
        write_ppm(uv_atlas(patches), cfg.atlas)
        written.append(cfg.atlas)
    return written


COMMANDS = {
    "render": cmd_render,
    "animate": cmd_animate,
    "curvature": cmd_curvature,
    "contours": cmd_contours,
    "lapped": cmd_lapped,
}


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (ArithmeticError, np.linalg.LinAlgError)):
        return EXIT_NUMERIC
    return EXIT_CONFIG


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        cfg.validate(args.command)
        COMMANDS[args.command](cfg)
    except (NprError, ValueError, KeyError, OSError, ArithmeticError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"nprkit {args.command}: error: {msg}", file=sys.stderr)
        return exit_code(e)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
