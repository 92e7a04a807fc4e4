"""Float RGBA color plus depth raster target."""
from __future__ import annotations

import numpy as np

from ..io.ppm import ImageBuffer


class Framebuffer:
    """``color`` is ``(H, W, 4)`` linear float, ``depth`` is ``(H, W)`` initialized to +inf."""

    def __init__(self, width: int, height: int, clear_color=(0.0, 0.0, 0.0, 0.0)):
        if width < 1 or height < 1:
            raise ValueError("framebuffer must be at least 1x1")
        self.width = int(width)
        self.height = int(height)
        self.color = np.empty((self.height, self.width, 4))
        self.depth = np.empty((self.height, self.width))
        self.clear(clear_color)

    @classmethod
    def for_camera(cls, camera, clear_color=(0.0, 0.0, 0.0, 0.0)) -> "Framebuffer":
        return cls(camera.width, camera.height, clear_color)

    def clear(self, color=(0.0, 0.0, 0.0, 0.0)) -> None:
        c = tuple(color) + (1.0,) * (4 - len(color))
        self.color[...] = c
        self.depth[...] = np.inf

    def copy(self) -> "Framebuffer":
        fb = Framebuffer.__new__(Framebuffer)
        fb.width, fb.height = self.width, self.height
        fb.color, fb.depth = self.color.copy(), self.depth.copy()
        return fb

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width

    def to_image(self, alpha: bool = False) -> ImageBuffer:
        """8-bit image, rounding half up after clamping to [0, 1]."""
        c = self.color if alpha else self.color[..., :3]
        return ImageBuffer.from_float(c)

    def __eq__(self, other):
        if not isinstance(other, Framebuffer):
            return NotImplemented
        return np.array_equal(self.color, other.color) and np.array_equal(self.depth, other.depth)

    def __repr__(self):
        return f"Framebuffer({self.width}x{self.height})"
