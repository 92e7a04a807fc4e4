"""Per-pixel shading models: Phong, Gooch cool-to-warm, banded toon, and
debug shaders for normals and depth.

Every shader exposes ``shade(positions, normals, view_dirs, material)``
returning linear RGB in [0, 1].  Light directions point from the surface
toward the light; ``None`` means a headlight along the view direction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mesh import Material


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _light(light_dir, view_dirs):
    if light_dir is None:
        return view_dirs
    return np.broadcast_to(_unit(light_dir), np.shape(view_dirs))


def _ndotl(normals, light):
    return np.einsum("...i,...i->...", normals, light)


@dataclass(frozen=True)
class PhongShader:
    material: Material | None = None  # None: use the surface material
    light_dir: tuple | None = None
    light_color: tuple = (1.0, 1.0, 1.0)
    ambient_color: tuple = (1.0, 1.0, 1.0)

    def shade(self, positions, normals, view_dirs, material=None):
        return shade_phong(self, normals, _light(self.light_dir, view_dirs), view_dirs, material)


@dataclass(frozen=True)
class GoochShader:
    k_d: tuple | None = None  # None: surface diffuse color
    k_blue: tuple = (0.0, 0.0, 0.4)
    k_yellow: tuple = (0.4, 0.4, 0.0)
    alpha: float = 0.2
    beta: float = 0.6
    light_dir: tuple | None = (-1.0, 1.0, 1.0)

    def __post_init__(self):
        for name in ("alpha", "beta"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"Gooch {name} must lie in [0, 1]")

    def shade(self, positions, normals, view_dirs, material=None):
        return shade_gooch(self, _ndotl(normals, _light(self.light_dir, view_dirs)), material)


@dataclass(frozen=True)
class ToonShader:
    levels: int = 3
    base_color: tuple | None = None  # None: surface diffuse color
    light_dir: tuple | None = (-1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.levels < 2:
            raise ValueError("toon shading needs at least 2 levels")

    def shade(self, positions, normals, view_dirs, material=None):
        return shade_toon(self, _ndotl(normals, _light(self.light_dir, view_dirs)), material)


@dataclass(frozen=True)
class NormalShader:
    """Encodes unit normals as ``(n + 1) / 2``."""

    def shade(self, positions, normals, view_dirs, material=None):
        return (np.asarray(normals) + 1.0) / 2.0


@dataclass(frozen=True)
class ConstantShader:
    color: tuple = (1.0, 1.0, 1.0)

    def shade(self, positions, normals, view_dirs, material=None):
        return np.broadcast_to(np.asarray(self.color, dtype=float), np.shape(normals)).copy()


def shade_gooch(config: GoochShader, ndotl, material: Material | None = None) -> np.ndarray:
    """``t k_warm + (1 - t) k_cool`` with ``t = (1 + n.l) / 2``, clamped."""
    kd = np.asarray(config.k_d if config.k_d is not None else (material or Material()).diffuse, dtype=float)
    k_cool = np.asarray(config.k_blue, dtype=float) + config.alpha * kd
    k_warm = np.asarray(config.k_yellow, dtype=float) + config.beta * kd
    t = (1.0 + np.asarray(ndotl, dtype=float)[..., None]) / 2.0
    return np.clip(t * k_warm + (1.0 - t) * k_cool, 0.0, 1.0)


def toon_intensity(levels: int, ndotl):
    d = np.maximum(np.asarray(ndotl, dtype=float), 0.0)
    return np.minimum(np.floor(d * levels) / (levels - 1), 1.0)


def shade_toon(config: ToonShader, ndotl, material: Material | None = None) -> np.ndarray:
    base = np.asarray(config.base_color if config.base_color is not None else (material or Material()).diffuse, dtype=float)
    return np.clip(toon_intensity(config.levels, ndotl)[..., None] * base, 0.0, 1.0)


def reflect(i, n):
    """Mirror direction of incident ``i`` about ``n``: ``i - 2 (n.i) n``."""
    i, n = np.asarray(i, dtype=float), np.asarray(n, dtype=float)
    return i - 2.0 * np.einsum("...i,...i->...", n, i)[..., None] * n


def shade_phong(config: PhongShader, n, l, v, material: Material | None = None) -> np.ndarray:
    """``ambient + diffuse max(n.l, 0) + specular max(r.v, 0)^s`` with ``r = reflect(-l, n)``.

    The specular term is zero where ``n.l <= 0``.
    """
    m = config.material or material or Material()
    n, l, v = (np.asarray(x, dtype=float) for x in (n, l, v))
    ndl = np.einsum("...i,...i->...", n, l)
    r = reflect(-l, n)
    rdv = np.maximum(np.einsum("...i,...i->...", r, v), 0.0)
    spec = np.where(ndl > 0, rdv ** m.shininess, 0.0)
    light = np.asarray(config.light_color, dtype=float)
    c = (
        np.asarray(config.ambient_color, dtype=float) * np.asarray(m.ambient)
        + light * np.asarray(m.diffuse) * np.maximum(ndl, 0.0)[..., None]
        + light * np.asarray(m.specular) * spec[..., None]
    )
    return np.clip(c, 0.0, 1.0)


SHADERS = {"phong": PhongShader, "gooch": GoochShader, "toon": ToonShader, "normals": NormalShader, "constant": ConstantShader}


def make_shader(name: str, **params):
    try:
        cls = SHADERS[name]
    except KeyError:
        raise ValueError(f"unknown shader {name!r}; choose from {', '.join(sorted(SHADERS))}") from None
    for k, v in list(params.items()):
        if isinstance(v, list):
            params[k] = tuple(v)
    return cls(**params)


__all__ = [
    "PhongShader", "GoochShader", "ToonShader", "NormalShader", "ConstantShader",
    "shade_phong", "shade_gooch", "shade_toon", "toon_intensity", "reflect", "make_shader",
]
