from .camera import Camera, frame_surface, parse_camera, project
from .framebuffer import Framebuffer
from .image_ops import KERNELS, SOBEL_X, SOBEL_Y, image_operator
from .lines import LineStyle, draw_segments, export_svg, render_lines, smooth_polyline
from .passes import FunctionPass, ImagePass, LinePass, PassGraph, Scene, SurfacePass, run_pass_graph
from .raster import rasterize_surface, triangle_coverage
from .shaders import (
    ConstantShader,
    GoochShader,
    NormalShader,
    PhongShader,
    ToonShader,
    make_shader,
    shade_gooch,
    shade_phong,
    shade_toon,
)

__all__ = [
    "Camera", "frame_surface", "parse_camera", "project", "Framebuffer", "KERNELS", "SOBEL_X", "SOBEL_Y",
    "image_operator", "LineStyle", "draw_segments", "export_svg", "render_lines", "smooth_polyline",
    "FunctionPass", "ImagePass", "LinePass", "PassGraph", "Scene", "SurfacePass", "run_pass_graph",
    "rasterize_surface", "triangle_coverage", "ConstantShader", "GoochShader", "NormalShader", "PhongShader",
    "ToonShader", "make_shader", "shade_gooch", "shade_phong", "shade_toon",
]
