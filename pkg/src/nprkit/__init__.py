"""Headless non-photorealistic rendering toolkit.

Half-edge meshes, curvature and curvature-derivative estimation,
view-dependent contour extraction, lapped-texture patches, keyframe and
skinned animation, and a software rendering pipeline.
"""
from .animation import MeshState, SkinnedSurface, VertexAnimatedSurface, deform, interpolate_keyframes
from .contours import ContourSet, Polyline, extract_isocurves, extract_silhouettes, extract_suggestive
from .curvature import CurvatureField, compute_curvature, estimate_curvature, estimate_curvature_derivative
from .lapped import Patch, TangentField, build_tangent_field, cover_surface
from .mesh import Material, Surface, build_mesh

__version__ = "0.1.0"

__all__ = [
    "MeshState", "SkinnedSurface", "VertexAnimatedSurface", "deform", "interpolate_keyframes",
    "ContourSet", "Polyline", "extract_isocurves", "extract_silhouettes", "extract_suggestive",
    "CurvatureField", "compute_curvature", "estimate_curvature", "estimate_curvature_derivative",
    "Patch", "TangentField", "build_tangent_field", "cover_surface",
    "Material", "Surface", "build_mesh",
]
