"""Multi-pass rendering: passes write the screen or named offscreen
textures, and graphs of passes nest like single passes."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from ..errors import UnboundTexture
from .camera import Camera
from .framebuffer import Framebuffer
from .image_ops import image_operator
from .lines import DEFAULT_DEPTH_BIAS, LineStyle, render_lines
from .raster import rasterize_surface

SCREEN = "screen"


@dataclass
class Scene:
    """Inputs shared by all passes of one frame."""

    state: Any
    camera: Camera
    curvature: Any = None
    contours: dict = field(default_factory=dict)  # name -> ContourSet, filled lazily
    contour_thresholds: tuple | None = None


class _Context:
    def __init__(self, scene: Scene, background):
        self.scene = scene
        self.textures: dict[str, Framebuffer] = {
            SCREEN: Framebuffer.for_camera(scene.camera, background)
        }

    def target(self, name: str) -> Framebuffer:
        if name not in self.textures:
            self.textures[name] = Framebuffer.for_camera(self.scene.camera)
        return self.textures[name]

    def read(self, name: str) -> Framebuffer:
        try:
            return self.textures[name]
        except KeyError:
            raise UnboundTexture(f"texture {name!r} is read before any pass writes it") from None


@dataclass
class SurfacePass:
    shader: Any
    target: str = SCREEN
    cull_backfaces: bool = True
    wireframe: bool = False

    def run(self, ctx: _Context) -> None:
        s = ctx.scene
        rasterize_surface(s.state, s.camera, self.shader, ctx.target(self.target),
                          self.cull_backfaces, self.wireframe)


@dataclass
class ImagePass:
    """Filter texture ``source`` into ``target`` (color replaced, depth copied)."""

    source: str
    op: Any
    target: str = SCREEN

    def run(self, ctx: _Context) -> None:
        ctx.textures[self.target] = image_operator(ctx.read(self.source), self.op)


@dataclass
class LinePass:
    """Stroke contours over ``target`` using its depth buffer.

    ``contours`` lists generator names (``"silhouette"``, ``"suggestive"``)
    or holds ready ContourSets.
    """

    contours: list
    style: LineStyle = field(default_factory=LineStyle)
    target: str = SCREEN
    depth_bias: float = DEFAULT_DEPTH_BIAS

    def run(self, ctx: _Context) -> None:
        fb = ctx.target(self.target)
        for item in self.contours:
            cs = _resolve_contours(ctx.scene, item) if isinstance(item, str) else item
            render_lines(cs, ctx.scene.camera, self.style, fb, self.depth_bias)


def _resolve_contours(scene: Scene, name: str):
    from .. import contours as ct

    if name in scene.contours:
        return scene.contours[name]
    if name == "silhouette":
        cs = ct.extract_silhouettes(scene.state, scene.camera)
    elif name == "suggestive":
        if scene.curvature is None:
            from ..animation import as_state
            from ..curvature import compute_curvature

            scene.curvature = compute_curvature(as_state(scene.state).to_surface(), attach=False)
        th = scene.contour_thresholds or (ct.DEFAULT_DERIVATIVE_THRESHOLD, ct.DEFAULT_ANGLE_THRESHOLD)
        cs = ct.extract_suggestive(scene.state, scene.curvature, scene.camera, th)
    else:
        raise ValueError(f"unknown contour generator {name!r}")
    scene.contours[name] = cs
    return cs


@dataclass
class FunctionPass:
    """Escape hatch: ``fn(textures, scene)`` mutates textures in place."""

    fn: Callable

    def run(self, ctx: _Context) -> None:
        self.fn(ctx.textures, ctx.scene)


@dataclass
class PassGraph:
    """Ordered passes sharing one texture namespace; a graph is itself a pass."""

    passes: list = field(default_factory=list)
    background: tuple = (1.0, 1.0, 1.0, 1.0)

    def add(self, p) -> "PassGraph":
        self.passes.append(p)
        return self

    def run(self, ctx: _Context) -> None:
        for p in self.passes:
            p.run(ctx)


def run_pass_graph(graph: PassGraph, scene: Scene, textures: dict | None = None) -> Framebuffer:
    """Execute ``graph`` and return the screen framebuffer.

    If ``textures`` is a dict, every named texture is stored into it.
    """
    ctx = _Context(scene, graph.background)
    graph.run(ctx)
    if textures is not None:
        textures.update(ctx.textures)
    return ctx.textures[SCREEN]
