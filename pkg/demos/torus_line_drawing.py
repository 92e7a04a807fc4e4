"""Line drawing of a torus, step by step with the library API.

    python3 demos/torus_line_drawing.py [out_dir]

Writes a Gooch-shaded PPM with silhouettes and suggestive contours on top,
plus the same contours as SVG.
"""
import os
import sys

from nprkit import compute_curvature, extract_silhouettes, extract_suggestive, shapes
from nprkit.contours import radial_curvature_field
from nprkit.io.ppm import write_ppm
from nprkit.render.camera import Camera
from nprkit.render.framebuffer import Framebuffer
from nprkit.render.lines import LineStyle, export_svg, render_lines
from nprkit.render.raster import rasterize_surface
from nprkit.render.shaders import GoochShader


def main(out_dir="demo_out"):
    os.makedirs(out_dir, exist_ok=True)
    torus = shapes.torus(n_major=96, n_minor=48)
    curvature = compute_curvature(torus)
    print(f"{torus.n_faces} faces, k1 in [{curvature.k1.min():.2f}, {curvature.k1.max():.2f}]")

    # an oblique view: seen exactly along the axis the radial curvature never changes sign
    camera = Camera(eye=(0.0, -3.0, 2.2), up=(0, 0, 1), fov=40, width=320, height=240)
    kr = radial_curvature_field(torus, curvature, camera)
    print(f"radial curvature in [{kr.min():.2f}, {kr.max():.2f}]")

    silhouettes = extract_silhouettes(torus, camera)
    suggestive = extract_suggestive(torus, curvature, camera)
    print(f"{len(silhouettes)} silhouette and {len(suggestive)} suggestive polylines")

    fb = rasterize_surface(torus, camera, GoochShader(), Framebuffer.for_camera(camera, clear_color=(1, 1, 1, 1)))
    style = LineStyle("catmull-rom", samples=4, width=1.5, antialias=True)
    for lines in (silhouettes, suggestive):
        render_lines(lines, camera, style, fb)
    write_ppm(fb.to_image(), os.path.join(out_dir, "torus.ppm"))
    with open(os.path.join(out_dir, "torus.svg"), "w", encoding="utf-8") as fh:
        fh.write(export_svg([silhouettes, suggestive], camera, style))
    print(f"wrote {out_dir}/torus.ppm and {out_dir}/torus.svg")


if __name__ == "__main__":
    main(*sys.argv[1:])
