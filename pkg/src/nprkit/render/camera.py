"""Pinhole and orthographic cameras with a top-left pixel origin."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Camera:
    eye: tuple = (0.0, 0.0, 3.0)
    target: tuple = (0.0, 0.0, 0.0)
    up: tuple = (0.0, 1.0, 0.0)
    fov: float = 45.0  # vertical, degrees
    near: float = 0.1
    far: float = 100.0
    width: int = 256
    height: int = 256
    ortho: float | None = None  # half-height of the view volume when orthographic

    def __post_init__(self):
        for name in ("eye", "target", "up"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        if not self.near < self.far:
            raise ValueError("camera needs near < far")
        if self.ortho is None and self.near <= 0:
            raise ValueError("perspective camera needs near > 0")
        if self.width < 1 or self.height < 1:
            raise ValueError("viewport must be at least 1x1")
        f = np.subtract(self.target, self.eye)
        if np.linalg.norm(f) == 0:
            raise ValueError("eye and target coincide")
        if np.linalg.norm(np.cross(f, self.up)) < 1e-12 * np.linalg.norm(f) * np.linalg.norm(self.up):
            raise ValueError("up vector is parallel to the view direction")

    @property
    def orthographic(self) -> bool:
        return self.ortho is not None

    @property
    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(right, up, forward) unit vectors."""
        f = np.subtract(self.target, self.eye)
        f = f / np.linalg.norm(f)
        r = np.cross(f, self.up)
        r /= np.linalg.norm(r)
        return r, np.cross(r, f), f

    @property
    def toward_viewer(self) -> np.ndarray:
        return -self.basis[2]

    @property
    def aspect(self) -> float:
        return self.width / self.height

    def view(self, points) -> np.ndarray:
        """Camera-space coordinates (x right, y up, z = distance along the view direction)."""
        r, u, f = self.basis
        d = np.asarray(points, dtype=float) - np.asarray(self.eye)
        return np.stack([d @ r, d @ u, d @ f], axis=-1)

    def project_view(self, q) -> tuple[np.ndarray, np.ndarray]:
        """Map camera-space points to (x, y pixel coordinates, normalized depth)."""
        q = np.asarray(q, dtype=float)
        x, y, z = q[..., 0], q[..., 1], q[..., 2]
        if self.orthographic:
            h = self.ortho
            nx, ny = x / (h * self.aspect), y / h
            depth = (z - self.near) / (self.far - self.near)
        else:
            t = math.tan(math.radians(self.fov) / 2)
            with np.errstate(divide="ignore", invalid="ignore"):
                nx = x / (z * t * self.aspect)
                ny = y / (z * t)
                depth = (1 / self.near - 1 / z) / (1 / self.near - 1 / self.far)
        sx = (nx + 1) / 2 * self.width
        sy = (1 - ny) / 2 * self.height
        return np.stack([sx, sy], axis=-1), depth

    def with_viewport(self, width: int, height: int) -> "Camera":
        d = dict(self.__dict__)
        d.update(width=width, height=height)
        return Camera(**d)


def project(camera: Camera, p):
    """Screen position, normalized depth and clipped flag of point(s) ``p``.

    Points nearer than the near plane or beyond the far plane are clipped.
    """
    q = camera.view(p)
    xy, depth = camera.project_view(q)
    z = q[..., 2]
    clipped = (z < camera.near) | (z > camera.far)
    if np.ndim(p) == 1:
        return float(xy[0]), float(xy[1]), float(depth), bool(clipped)
    return xy, depth, clipped


_VEC = r"(-?[\d.eE+-]+),(-?[\d.eE+-]+),(-?[\d.eE+-]+)"


def parse_camera(spec: str, base: Camera | None = None) -> Camera:
    """Parse ``"eye=x,y,z;target=x,y,z;up=x,y,z;fov=deg;size=WxH"``.

    ``ortho=halfheight`` selects an orthographic projection; ``near`` and
    ``far`` are also accepted.  Missing keys keep the values of ``base``.
    """
    fields = dict((base or Camera()).__dict__)
    for part in filter(None, (s.strip() for s in spec.split(";"))):
        key, sep, val = part.partition("=")
        key, val = key.strip().lower(), val.strip().replace(" ", "")
        if not sep:
            raise ValueError(f"camera spec entry {part!r} is not key=value")
        if key in ("eye", "target", "up"):
            m = re.fullmatch(_VEC, val)
            if not m:
                raise ValueError(f"camera {key} needs three comma-separated numbers")
            fields[key] = tuple(float(g) for g in m.groups())
        elif key in ("fov", "near", "far"):
            fields[key] = float(val)
        elif key == "ortho":
            fields["ortho"] = float(val)
        elif key == "size":
            m = re.fullmatch(r"(\d+)[xX](\d+)", val)
            if not m:
                raise ValueError("camera size must be WxH")
            fields["width"], fields["height"] = int(m.group(1)), int(m.group(2))
        else:
            raise ValueError(f"unknown camera key {key!r}")
    return Camera(**fields)


def frame_surface(surface, width=256, height=256, fov=35.0, direction=(0.0, 0.0, 1.0), up=(0.0, 1.0, 0.0)) -> Camera:
    """Perspective camera looking at the bounding sphere from ``direction``."""
    c, r = surface.bounding_sphere
    r = max(r, 1e-9)
    d = np.asarray(direction, dtype=float)
    d /= np.linalg.norm(d)
    dist = r / math.sin(math.radians(fov) / 2) * 1.05
    return Camera(
        eye=tuple(c + dist * d), target=tuple(c), up=up, fov=fov,
        near=max(dist - 2 * r, dist * 1e-3), far=dist + 2 * r, width=width, height=height,
    )
